#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "sbx/error.hpp"
#include "sbx/experiments.hpp"

using namespace sbx;

namespace
{
Json config(std::string recipe, Json params = Json::object(), Json mech = {{"preset", "binary"}})
{
    return {{"recipe", std::move(recipe)}, {"seed", 11}, {"mechanism", mech}, {"params", params}};
}

ErrorCode code_of(Json const& doc)
{
    try
    {
        parse_spec(doc);
    }
    catch (Error const& e)
    {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Empty;
}

std::filesystem::path scratch(std::string const& name)
{
    auto p = std::filesystem::temp_directory_path() / ("sbx_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

int cli(std::string const& args)
{
    int status = std::system((std::string(SBX_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}
}  // namespace

TEST_CASE("catalog")
{
    auto const& list = list_recipes();
    CHECK(list.size() == 12);
    std::set<std::string> names;
    for (auto const& r : list)
    {
        CHECK_FALSE(r.anchor.empty());
        CHECK_FALSE(r.description.empty());
        CHECK(r.defaults.is_object());
        names.insert(r.name);
    }
    CHECK(names.size() == 12);
    CHECK(names.count("dichotomy-4.13") == 1);
    CHECK(names.count("appendix-A2") == 1);
    CHECK(find_recipe("travelling-wave").name == "travelling-wave");
    CHECK_THROWS_AS(find_recipe("no-such-recipe"), Error);
}

TEST_CASE("config validation")
{
    CHECK(code_of(config("no-such-recipe")) == ErrorCode::UnknownRecipe);
    auto no_seed = config("skeleton-derive");
    no_seed.erase("seed");
    CHECK(code_of(no_seed) == ErrorCode::ConfigInvalid);
    auto neg_seed = config("skeleton-derive");
    neg_seed["seed"] = -3;
    CHECK(code_of(neg_seed) == ErrorCode::ConfigInvalid);
    CHECK(code_of(config("skeleton-derive", {{"bogus", 1}})) == ErrorCode::ConfigInvalid);
    CHECK(code_of(config("kpp-duality", {{"replicas", "many"}})) == ErrorCode::ConfigInvalid);
    // an integer parameter does not take a fractional value
    CHECK(code_of(config("kpp-duality", {{"replicas", 2.5}})) == ErrorCode::ConfigInvalid);
    CHECK(code_of(config("skeleton-derive", {}, {{"preset", "cubic"}})) == ErrorCode::ConfigInvalid);
    auto extra = config("skeleton-derive");
    extra["colour"] = "red";
    CHECK(code_of(extra) == ErrorCode::ConfigInvalid);

    auto spec = parse_spec(config("kpp-duality", {{"replicas", 10}, {"t", 1}}));
    CHECK(spec.params.at("replicas") == 10);
    CHECK(spec.params.at("t") == 1);
    CHECK(spec.params.at("allowance") == find_recipe("kpp-duality").defaults.at("allowance"));
}

TEST_CASE("mechanism blocks")
{
    auto m = parse_mechanism({{"alpha", 2.0}, {"beta", 0.5}});
    CHECK(m.is_normalized());
    CHECK(m.lambda_star() == doctest::Approx(1).epsilon(1e-12));
    auto atoms = parse_mechanism(
        {{"alpha", 1.0}, {"levy", {{"atoms", {{{"weight", 1.0}, {"location", remark_root_y0()}}}}}}});
    CHECK(atoms.levy().kind() == LevyMeasure::Kind::Atomic);
    auto dens = parse_mechanism(
        {{"alpha", 1.0}, {"levy", {{"density", {{"c", 1.0}, {"a", 1.5}, {"y_min", 1.0}}}}}});
    CHECK(dens.levy().kind() == LevyMeasure::Kind::ExpPoly);
    CHECK_THROWS_AS(parse_mechanism({{"beta", 1.0}}), Error);
}

TEST_CASE("config hash")
{
    auto a = parse_spec(config("skeleton-derive"));
    auto b = a;
    b.output_dir = "/somewhere/else";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    auto c = a;
    c.seed = 12;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("skeleton recipe on the binary mechanism")
{
    auto rec = run_experiment(parse_spec(config("skeleton-derive")));
    CHECK(rec.passed());
    auto const& ev = rec.check("generating_identity").evidence;
    CHECK(ev.at("q") == 1.0);
    CHECK(ev.at("p")[2] == 1.0);
    CHECK(rec.check("generating_identity").statistic < 1e-12);
    CHECK_THROWS_AS(rec.check("missing"), Error);
}

TEST_CASE("dichotomy recipe")
{
    auto bin = run_experiment(parse_spec(config("dichotomy-4.13")));
    CHECK(bin.passed());
    CHECK(bin.check("divergence_matches_a3").evidence.at("divergent") == false);
    auto rem = run_experiment(parse_spec(config("dichotomy-4.13", {}, {{"preset", "remark"}})));
    CHECK(rem.passed());
    CHECK(rem.check("divergence_matches_a3").evidence.at("divergent") == true);
}

TEST_CASE("equivalence recipe")
{
    auto rec = run_experiment(parse_spec(config("appendix-A2")));
    CHECK(rec.passed());
    CHECK(rec.check("classifications_agree").statistic == 0);
    CHECK(rec.check("classifications_agree").evidence.at("rows").size() == 10);
}

TEST_CASE("guard against missing (A3)")
{
    auto rec = run_experiment(
        parse_spec(config("conditioned-sbm", {{"attempts", 10}}, {{"preset", "remark"}})));
    CHECK(rec.passed());
    CHECK(rec.checks.size() == 1);
    CHECK(rec.check("a3_guard").statistic == 1);
}

TEST_CASE("artifacts and reproducibility")
{
    auto dir = scratch("artifacts");
    auto doc = config("poissonization", {{"replicas", 2000}});
    doc["output_dir"] = dir.string();
    auto spec = parse_spec(doc);
    auto a = run_experiment(spec);
    auto folder = dir / "poissonization" / a.config_hash;
    CHECK(std::filesystem::exists(folder / "result.json"));
    std::ifstream in(folder / "result.json");
    auto stored = Json::parse(in);
    CHECK(stored.at("config_hash") == a.config_hash);
    CHECK(stored.at("checks").size() == a.checks.size());

    spec.output_dir.clear();
    auto b = run_experiment(spec);
    CHECK(b.artifacts.empty());
    CHECK(statistics_fingerprint(a) == statistics_fingerprint(b));
    CHECK(to_json(a, false).at("checks") == to_json(b, false).at("checks"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("command line exit codes")
{
    auto dir = scratch("cli");
    auto write = [&](std::string const& name, std::string const& text) {
        auto p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    };
    auto good = write("good.json", R"({"recipe": "skeleton-derive", "seed": 1})");
    // an impossible tolerance makes the check fail
    auto failing = write("fail.json",
                         R"({"recipe": "skeleton-derive", "seed": 1, "params": {"residual_tol": -1}})");
    auto unknown = write("unknown.json", R"({"recipe": "nothing", "seed": 1})");
    auto broken = write("broken.json", R"({"recipe": )");

    CHECK(cli("list") == 0);
    CHECK(cli("validate " + good) == 0);
    CHECK(cli("validate " + unknown) == 2);
    CHECK(cli("run " + good + " -o " + (dir / "out").string()) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "skeleton-derive"));
    CHECK(cli("run -q " + failing) == 1);
    CHECK(cli("run " + unknown) == 2);
    CHECK(cli("run " + broken) == 2);
    CHECK(cli("run " + (dir / "absent.json").string()) == 2);
    CHECK(cli("") != 0);
    std::filesystem::remove_all(dir);
}
