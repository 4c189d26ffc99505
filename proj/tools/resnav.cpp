// resnav: run and validate scenario files, or run the acceptance suite.

#include "resnav/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    CLI::App app{"Resilient navigation simulator"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out = "trace.csv";
    std::optional<std::uint64_t> seed;

    auto *run = app.add_subcommand("run", "Simulate a scenario and write its trace");
    run->add_option("scenario", scenario, "Scenario JSON file")->required();
    run->add_option("--out", out, "Trace CSV path");
    run->add_option("--seed", seed, "Override the scenario seed");

    auto *validate = app.add_subcommand("validate", "Check a scenario file without simulating");
    validate->add_option("scenario", scenario, "Scenario JSON file")->required();

    auto *acc = app.add_subcommand("acceptance", "Run the built-in acceptance suite");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        // Usage errors go to stderr with exit code 1.
        const int rc = app.exit(e, std::cerr, std::cerr);
        return rc == 0 ? 0 : 1;
    }

    if (run->parsed())
        return resnav::cli::cmd_run(scenario, out, seed, std::cout, std::cerr);
    if (validate->parsed())
        return resnav::cli::cmd_validate(scenario, std::cout, std::cerr);
    if (acc->parsed())
        return resnav::cli::cmd_acceptance(std::cout);
    return 1;
}
