// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "photoncorr/errors.hpp"

namespace {

using photoncorr::cli::GlobalOptions;

nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw photoncorr::config_error("cannot open config " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw photoncorr::config_error(std::string("config parse error: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"photon-counting correlation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    GlobalOptions options;
    std::uint64_t seed_flag = 0;
    std::string out_dir;

    const std::map<std::string, std::function<void(nlohmann::json, const GlobalOptions&)>>
        commands{{"simulate", photoncorr::cli::cmd_simulate},
                 {"filter", photoncorr::cli::cmd_filter},
                 {"correlate", photoncorr::cli::cmd_correlate},
                 {"g3-direct", photoncorr::cli::cmd_g3_direct},
                 {"scan", photoncorr::cli::cmd_scan},
                 {"extract", photoncorr::cli::cmd_extract},
                 {"qmt", photoncorr::cli::cmd_qmt},
                 {"plan-snr", photoncorr::cli::cmd_plan_snr}};

    std::string chosen;
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        auto* seed_opt = sub->add_option("--seed", seed_flag, "override the config seed");
        sub->add_option("--out", out_dir, "directory for relative output paths");
        sub->add_option("--threads", options.threads, "worker threads");
        sub->callback([&, name = name, seed_opt] {
            chosen = name;
            if (seed_opt->count() > 0) options.seed = seed_flag;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        options.out_dir = out_dir;
        commands.at(chosen)(load_config(config_path), options);
        return 0;
    } catch (const photoncorr::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
