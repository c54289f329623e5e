// Command-line entry point: rwre-lab <command> --config cfg.json [options]

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rwre/cli.hpp"

namespace
{

rwre::Json read_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config '" + path + "'");
    return rwre::Json::parse(in);
}

int print_diagnostics(rwre::Validation const& v)
{
    for (auto const& d : v.diagnostics)
        std::cout << d.severity << " " << d.path << ": " << d.message << "\n";
    std::cout << "states: " << v.state_count << "\n";
    std::cout << "memory estimate (bytes): " << static_cast<long long>(v.memory_bytes) << "\n";
    return v.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random walk in random environment laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int workers = 1;
    bool deterministic = false;
    std::string out = "runs";

    std::vector<CLI::App*> subs;
    for (char const* name : {"walk", "green", "criterion", "concentration", "sweep", "validate"})
    {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--deterministic", deterministic, "record deterministic mode");
        sub->add_option("--out", out, "archive root directory");
        subs.push_back(sub);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        return app.exit(e) == 0 ? 0 : 2;
    }

    std::string const command = app.get_subcommands().front()->get_name();
    rwre::Json config;
    try
    {
        config = read_config(config_path);
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    rwre::RunOptions opts;
    opts.workers = workers;
    opts.out = out;
    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed"))
        opts.seed = seed;
    if (deterministic)
        opts.deterministic = true;

    if (command == "validate")
        return print_diagnostics(rwre::validate(rwre::apply_overrides(config, opts)));

    if (config.is_object())
    {
        if (!config.contains("command"))
            config["command"] = command;
        else if (config["command"] != command)
        {
            std::cerr << "error: /command: config is for '" << config["command"].dump()
                      << "', not '" << command << "'\n";
            return 2;
        }
    }

    try
    {
        auto const outcome = rwre::run(config, opts);
        for (auto const& w : outcome.warnings)
            std::cerr << "warning: " << w << "\n";
        for (auto const& [field, msg] : outcome.errors)
            std::cerr << "error: " << field << ": " << msg << "\n";
        if (!outcome.archive.empty())
        {
            std::cout << "run " << outcome.run_id << "\n";
            std::cout << "archive " << outcome.archive.string() << "\n";
        }
        return outcome.exit_code;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
