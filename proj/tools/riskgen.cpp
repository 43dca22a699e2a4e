#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

#include "cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"riskgen: transport-penalized risk generators, Chernoff schemes and oracles"};
    std::string subcommand, config, out_dir = ".";
    std::optional<std::uint64_t> seed;
    app.add_option("subcommand", subcommand, "subcommand")
        ->required()
        ->check(CLI::IsMember(riskgen::cli::subcommands()));
    app.add_option("--config", config, "JSON experiment config")->required();
    app.add_option("--out-dir", out_dir, "directory for the CSV and JSON reports");
    app.add_option("--seed", seed, "overrides the config seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return riskgen::cli::validation_failed;
    }
    return riskgen::cli::run(subcommand, config, out_dir, seed, std::cout, std::cerr);
}
