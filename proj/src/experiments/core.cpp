#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "context.hpp"
#include "sbx/error.hpp"

namespace sbx
{
namespace detail
{
namespace
{
std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

RecipeContext::RecipeContext(ExperimentSpec const& spec, std::string hash)
    : spec_(spec), mech_(parse_mechanism(spec.mechanism))
{
    if (!spec.output_dir.empty())
    {
        dir_ = std::filesystem::path(spec.output_dir) / spec.name / hash;
        std::filesystem::create_directories(dir_);
    }
}

std::size_t RecipeContext::count(std::string const& key) const
{
    return param(key).get<std::size_t>();
}

std::vector<double> RecipeContext::list(std::string const& key) const
{
    return param(key).get<std::vector<double>>();
}

void RecipeContext::add_le(std::string id, double statistic, double threshold, Json evidence)
{
    add({std::move(id), statistic, threshold, statistic <= threshold, std::move(evidence)});
}

void RecipeContext::add_flag(std::string id, bool pass, double statistic, double threshold,
                             Json evidence)
{
    add({std::move(id), statistic, threshold, pass, std::move(evidence)});
}

void RecipeContext::write_csv(std::string const& file, std::vector<std::string> const& header,
                              std::vector<std::vector<double>> const& rows)
{
    if (dir_.empty())
        return;
    auto path = dir_ / file;
    std::ofstream out(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    for (auto const& row : rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    artifacts_.push_back(path.string());
}

void RecipeContext::write_json(std::string const& file, Json const& doc)
{
    if (dir_.empty())
        return;
    auto path = dir_ / file;
    std::ofstream(path) << doc.dump(2) << '\n';
    artifacts_.push_back(path.string());
}

Profile parse_profile(Json const& block)
{
    auto kind = block.value("kind", std::string("indicator"));
    if (kind == "constant")
        return Profile::constant(block.at("height").get<double>());
    if (kind == "indicator")
    {
        auto bound = [&](char const* key, double fallback) {
            if (!block.contains(key) || block.at(key).is_null())
                return fallback;
            return block.at(key).get<double>();
        };
        return Profile::indicator(bound("a", -INFINITY), bound("b", INFINITY),
                                  block.at("height").get<double>());
    }
    if (kind == "gaussian")
    {
        double h = block.at("height").get<double>();
        double c = block.value("center", 0.0);
        double w = block.value("width", 1.0);
        double reach = 8 * w;
        return Profile([=](double x) { return h * std::exp(-(x - c) * (x - c) / (2 * w * w)); },
                       {}, c - reach, c + reach);
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown profile kind " + kind);
}

}  // namespace detail

namespace
{
using detail::registry;

bool same_kind(Json const& a, Json const& b)
{
    if (a.is_number() && b.is_number())
        return !(a.is_number_integer() || a.is_number_unsigned()) ||
               b.is_number_integer() || b.is_number_unsigned();
    return a.type() == b.type();
}

Json merge_params(std::string const& recipe, Json const& defaults, Json const& given)
{
    Json out = defaults;
    if (given.is_null())
        return out;
    if (!given.is_object())
        throw Error(ErrorCode::ConfigInvalid, "params must be an object");
    for (auto it = given.begin(); it != given.end(); ++it)
    {
        if (!defaults.contains(it.key()))
            throw Error(ErrorCode::ConfigInvalid,
                        "unknown parameter '" + it.key() + "' for " + recipe);
        if (!same_kind(defaults.at(it.key()), it.value()))
            throw Error(ErrorCode::ConfigInvalid, "parameter '" + it.key() + "' expects " +
                                                      defaults.at(it.key()).type_name());
        out[it.key()] = it.value();
    }
    return out;
}

LevyMeasure parse_levy(Json const& block)
{
    if (block.is_null())
        return {};
    if (block.contains("atoms"))
    {
        std::vector<LevyMeasure::Atom> atoms;
        for (auto const& a : block.at("atoms"))
            atoms.push_back({a.at("weight").get<double>(), a.at("location").get<double>()});
        return LevyMeasure::atomic(std::move(atoms));
    }
    if (block.contains("density"))
    {
        auto const& d = block.at("density");
        LevyMeasure::Density den;
        den.c = d.at("c").get<double>();
        den.a = d.value("a", 0.0);
        den.b = d.value("b", 0.0);
        den.y_min = d.value("y_min", 0.0);
        if (d.contains("y_max") && !d.at("y_max").is_null())
            den.y_max = d.at("y_max").get<double>();
        return LevyMeasure::exp_poly(den);
    }
    throw Error(ErrorCode::ConfigInvalid, "levy block needs atoms or density");
}

}  // namespace

bool ResultRecord::passed() const
{
    for (auto const& c : checks)
        if (!c.pass)
            return false;
    return true;
}

CheckReport const& ResultRecord::check(std::string const& id) const
{
    for (auto const& c : checks)
        if (c.check_id == id)
            return c;
    throw Error(ErrorCode::InvalidArgument, "no check " + id + " in " + recipe);
}

std::vector<RecipeInfo> const& list_recipes()
{
    static std::vector<RecipeInfo> const infos = [] {
        std::vector<RecipeInfo> v;
        for (auto const& e : registry())
            v.push_back(e.info);
        return v;
    }();
    return infos;
}

RecipeInfo const& find_recipe(std::string const& name)
{
    for (auto const& info : list_recipes())
        if (info.name == name)
            return info;
    throw Error(ErrorCode::UnknownRecipe, name);
}

BranchingMechanism parse_mechanism(Json const& block)
{
    try
    {
        if (block.is_null())
            return normalize_mechanism(bank::binary()).mechanism;
        if (!block.is_object())
            throw Error(ErrorCode::ConfigInvalid, "mechanism must be an object");
        if (block.contains("preset"))
        {
            auto name = block.at("preset").get<std::string>();
            if (name == "binary")
                return bank::binary();
            if (name == "remark")
                return bank::remark_atom();
            if (name == "mixture")
                return bank::mixture();
            if (name == "power_tail")
                return normalize_mechanism(bank::power_tail()).mechanism;
            throw Error(ErrorCode::ConfigInvalid, "unknown mechanism preset " + name);
        }
        BranchingMechanism m(block.at("alpha").get<double>(), block.value("beta", 0.0),
                             parse_levy(block.value("levy", Json())));
        return normalize_mechanism(m).mechanism;
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorCode::ConfigInvalid, std::string("mechanism: ") + e.what());
    }
}

ExperimentSpec parse_spec(Json const& doc)
{
    if (!doc.is_object())
        throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    if (!doc.contains("recipe") || !doc.at("recipe").is_string())
        throw Error(ErrorCode::ConfigInvalid, "missing recipe name");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (it.key() != "recipe" && it.key() != "seed" && it.key() != "mechanism" &&
            it.key() != "params" && it.key() != "output_dir")
            throw Error(ErrorCode::ConfigInvalid, "unknown key '" + it.key() + "'");

    ExperimentSpec spec;
    spec.name = doc.at("recipe").get<std::string>();
    auto const& info = find_recipe(spec.name);
    if (!doc.contains("seed") || !(doc.at("seed").is_number_unsigned() ||
                                   (doc.at("seed").is_number_integer() && doc.at("seed") >= 0)))
        throw Error(ErrorCode::ConfigInvalid, "seed must be a nonnegative integer");
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.mechanism = doc.value("mechanism", Json(Json::object({{"preset", "binary"}})));
    parse_mechanism(spec.mechanism);
    spec.params = merge_params(spec.name, info.defaults, doc.value("params", Json()));
    if (doc.contains("output_dir"))
    {
        if (!doc.at("output_dir").is_string())
            throw Error(ErrorCode::ConfigInvalid, "output_dir must be a string");
        spec.output_dir = doc.at("output_dir").get<std::string>();
    }
    return spec;
}

std::string config_hash(ExperimentSpec const& spec)
{
    Json canon = {{"recipe", spec.name},
                  {"seed", spec.seed},
                  {"mechanism", spec.mechanism},
                  {"params", spec.params}};
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon.dump())
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

ResultRecord run_experiment(ExperimentSpec const& spec)
{
    auto start = std::chrono::steady_clock::now();
    detail::RecipeFn fn = nullptr;
    for (auto const& e : registry())
        if (e.info.name == spec.name)
            fn = e.fn;
    if (!fn)
        throw Error(ErrorCode::UnknownRecipe, spec.name);

    ResultRecord rec;
    rec.recipe = spec.name;
    rec.config_hash = config_hash(spec);
    detail::RecipeContext ctx(spec, rec.config_hash);
    try
    {
        fn(ctx);
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    rec.checks = std::move(ctx.checks());
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!ctx.dir().empty())
    {
        auto path = ctx.dir() / "result.json";
        rec.artifacts = ctx.artifacts();
        rec.artifacts.push_back(path.string());
        std::ofstream(path) << to_json(rec).dump(2) << '\n';
    }
    return rec;
}

Json to_json(CheckReport const& c)
{
    return {{"check_id", c.check_id},
            {"statistic", c.statistic},
            {"threshold", c.threshold},
            {"pass", c.pass},
            {"evidence", c.evidence}};
}

Json to_json(ResultRecord const& r, bool with_wall_time)
{
    Json checks = Json::array();
    for (auto const& c : r.checks)
        checks.push_back(to_json(c));
    Json doc = {{"recipe", r.recipe},
                {"config_hash", r.config_hash},
                {"passed", r.passed()},
                {"checks", checks},
                {"artifacts", r.artifacts}};
    if (with_wall_time)
        doc["wall_time"] = r.wall_time;
    return doc;
}

std::string statistics_fingerprint(ResultRecord const& r)
{
    std::string out;
    for (auto const& c : r.checks)
    {
        out += c.check_id + "=" + detail::format_double(c.statistic) + ";";
        out += c.evidence.dump() + "\n";
    }
    return out;
}

}  // namespace sbx
