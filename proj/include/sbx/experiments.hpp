#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbx/mechanism.hpp"

namespace sbx
{
using Json = nlohmann::json;

struct CheckReport
{
    std::string check_id;
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
    Json evidence = Json::object();
};

struct ExperimentSpec
{
    std::string name;
    Json mechanism;
    //! Recipe parameters, completed with the recipe defaults.
    Json params;
    std::uint64_t seed = 0;
    std::string output_dir;
};

struct ResultRecord
{
    std::string recipe;
    std::string config_hash;
    std::vector<CheckReport> checks;
    std::vector<std::string> artifacts;
    double wall_time = 0;

    bool passed() const;
    CheckReport const& check(std::string const& id) const;
};

struct RecipeInfo
{
    std::string name;
    std::string description;
    std::string anchor;
    Json defaults;
};

//! Registered recipes in catalog order.
std::vector<RecipeInfo> const& list_recipes();
//! Throws UnknownRecipe.
RecipeInfo const& find_recipe(std::string const& name);

/*!
 * Validate a config document: known recipe, integer seed, parseable
 * mechanism, parameter names and types matching the recipe defaults.
 * Throws UnknownRecipe or ConfigInvalid.
 */
ExperimentSpec parse_spec(Json const& doc);

//! FNV-1a over the canonical dump of everything except the output directory.
std::string config_hash(ExperimentSpec const& spec);

/*!
 * Mechanism block: {"preset": name} or {"alpha", "beta", "levy"}; the result
 * is normalized.
 */
BranchingMechanism parse_mechanism(Json const& block);

/*!
 * Run a recipe. Artifacts go to <output_dir>/<recipe>/<hash>/ unless the
 * output directory is empty.
 */
ResultRecord run_experiment(ExperimentSpec const& spec);

Json to_json(CheckReport const& c);
Json to_json(ResultRecord const& r, bool with_wall_time = true);

//! The statistic values only, for reproducibility comparisons.
std::string statistics_fingerprint(ResultRecord const& r);

}  // namespace sbx
