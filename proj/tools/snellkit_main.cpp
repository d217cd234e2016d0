#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "snellkit/report_io.hpp"

namespace {

struct Cli {
    std::string command;
    std::string config_path;
    std::string csv_path;
    bool quiet = false;
    snellkit::CliOverrides overrides;
};

void add_subcommand(CLI::App& app, Cli& cli, const std::string& name, const std::string& blurb) {
    CLI::App* sub = app.add_subcommand(name, blurb);
    sub->add_option("--config", cli.config_path, "job config (JSON)")->required();
    sub->add_option("--csv", cli.csv_path, "write the tabular output to this file");
    sub->add_flag("--quiet", cli.quiet, "suppress the JSON report on stdout");
    sub->add_option("--seed", [&cli](const std::vector<std::string>& v) {
        cli.overrides.seed = std::stoull(v.at(0));
        return true;
    }, "override run.seed");
    sub->add_option("--paths", [&cli](const std::vector<std::string>& v) {
        cli.overrides.paths = std::stol(v.at(0));
        return true;
    }, "override run.paths (0 = exact enumeration)");
    sub->add_option("--grid", [&cli](const std::vector<std::string>& v) {
        cli.overrides.grid = std::stoi(v.at(0));
        return true;
    }, "override model.grid_points");
    sub->add_option("--tol", [&cli](const std::vector<std::string>& v) {
        cli.overrides.tol = std::stod(v.at(0));
        return true;
    }, "override run.tol");
    sub->callback([&cli, name] { cli.command = name; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal stopping on chains and one-dimensional diffusions"};
    app.require_subcommand(1);
    Cli cli;
    add_subcommand(app, cli, "solve", "value surface by backward induction");
    add_subcommand(app, cli, "decompose", "predictable compensators and mu");
    add_subcommand(app, cli, "mu", "density of the envelope compensator");
    add_subcommand(app, cli, "approx_dm", "partition approximation of the compensator");
    add_subcommand(app, cli, "dual", "martingale upper bound (exact or Monte Carlo)");
    add_subcommand(app, cli, "diffusion_solve", "concave-majorant solution of a diffusion");
    add_subcommand(app, cli, "smoothfit", "difference-quotient check at free boundaries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::ifstream in(cli.config_path);
        if (!in) {
            std::cerr << "cannot read config file: " << cli.config_path << "\n";
            return 2;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        const snellkit::JobConfig config = snellkit::parse_config(buf.str());
        const snellkit::CommandResult result =
            snellkit::run_command(cli.command, config, cli.overrides);
        if (!cli.csv_path.empty()) {
            std::ofstream out(cli.csv_path);
            if (!out) {
                std::cerr << "cannot write csv file: " << cli.csv_path << "\n";
                return 2;
            }
            out << result.csv;
        }
        if (!cli.quiet) std::cout << result.report_json;
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
