#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sbx/error.hpp"
#include "sbx/experiments.hpp"

namespace
{
constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;

sbx::Json load(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw sbx::Error(sbx::ErrorCode::ConfigInvalid, "cannot open " + path);
    try
    {
        return sbx::Json::parse(in);
    }
    catch (sbx::Json::parse_error const& e)
    {
        throw sbx::Error(sbx::ErrorCode::ConfigInvalid, e.what());
    }
}

bool config_error(sbx::Error const& e)
{
    return e.code() == sbx::ErrorCode::ConfigInvalid || e.code() == sbx::ErrorCode::UnknownRecipe;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"superprocess extremes experiment runner"};
    app.require_subcommand(1);

    std::string config;
    std::string out_override;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "run a recipe from a JSON config");
    run->add_option("config", config, "config file")->required();
    run->add_option("-o,--output-dir", out_override, "override the output directory");
    run->add_flag("-q,--quiet", quiet, "print only the summary line");

    auto* list = app.add_subcommand("list", "list the registered recipes");

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*list)
        {
            for (auto const& r : sbx::list_recipes())
                std::cout << r.name << "\t" << r.description << "\n\t[" << r.anchor << "]\n";
            return kPass;
        }
        auto spec = sbx::parse_spec(load(config));
        if (*validate)
        {
            std::cout << "ok " << spec.name << " " << sbx::config_hash(spec) << "\n";
            return kPass;
        }
        if (!out_override.empty())
            spec.output_dir = out_override;
        auto rec = sbx::run_experiment(spec);
        if (!quiet)
            std::cout << sbx::to_json(rec).dump(2) << "\n";
        std::cout << (rec.passed() ? "PASS " : "FAIL ") << rec.recipe << " " << rec.config_hash
                  << "\n";
        return rec.passed() ? kPass : kCheckFailed;
    }
    catch (sbx::Error const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return config_error(e) ? kConfigError : kCheckFailed;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
}
