#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sbx/experiments.hpp"
#include "sbx/kpp_solver.hpp"

namespace sbx::detail
{
class RecipeContext
{
  public:
    RecipeContext(ExperimentSpec const& spec, std::string hash);

    ExperimentSpec const& spec() const { return spec_; }
    BranchingMechanism const& mechanism() const { return mech_; }
    Json const& param(std::string const& key) const { return spec_.params.at(key); }
    double num(std::string const& key) const { return param(key).get<double>(); }
    std::size_t count(std::string const& key) const;
    std::vector<double> list(std::string const& key) const;
    std::uint64_t seed() const { return spec_.seed; }

    void add(CheckReport c) { checks_.push_back(std::move(c)); }
    //! statistic <= threshold passes.
    void add_le(std::string id, double statistic, double threshold, Json evidence = Json::object());
    void add_flag(std::string id, bool pass, double statistic = 0, double threshold = 0,
                  Json evidence = Json::object());

    //! Writes rows under the artifact directory, if there is one.
    void write_csv(std::string const& file, std::vector<std::string> const& header,
                   std::vector<std::vector<double>> const& rows);
    void write_json(std::string const& file, Json const& doc);

    std::vector<CheckReport>& checks() { return checks_; }
    std::vector<std::string>& artifacts() { return artifacts_; }
    std::filesystem::path const& dir() const { return dir_; }

  private:
    ExperimentSpec spec_;
    BranchingMechanism mech_;
    std::filesystem::path dir_;
    std::vector<CheckReport> checks_;
    std::vector<std::string> artifacts_;
};

//! Test function from a JSON block: indicator, gaussian bump or constant.
Profile parse_profile(Json const& block);

using RecipeFn = void (*)(RecipeContext&);

void skeleton_derive(RecipeContext& ctx);
void kpp_duality(RecipeContext& ctx);
void martingales(RecipeContext& ctx);
void front_constant(RecipeContext& ctx);
void travelling_wave_recipe(RecipeContext& ctx);
void max_law_gumbel(RecipeContext& ctx);
void poissonization(RecipeContext& ctx);
void extremal_process(RecipeContext& ctx);
void decoration_bank(RecipeContext& ctx);
void conditioned_sbm(RecipeContext& ctx);
void dichotomy(RecipeContext& ctx);
void appendix_equivalence(RecipeContext& ctx);

struct Entry
{
    RecipeInfo info;
    RecipeFn fn;
};

std::vector<Entry> const& registry();

}  // namespace sbx::detail
