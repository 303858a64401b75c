// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

namespace photoncorr::cli {

struct GlobalOptions {
    std::optional<std::uint64_t> seed; ///< overrides the config seed
    std::filesystem::path out_dir;     ///< prefix for relative output paths
    unsigned threads = 1;
};

void cmd_simulate(nlohmann::json config, const GlobalOptions& opt);
void cmd_filter(nlohmann::json config, const GlobalOptions& opt);
void cmd_correlate(nlohmann::json config, const GlobalOptions& opt);
void cmd_g3_direct(nlohmann::json config, const GlobalOptions& opt);
void cmd_scan(nlohmann::json config, const GlobalOptions& opt);
void cmd_extract(nlohmann::json config, const GlobalOptions& opt);
void cmd_qmt(nlohmann::json config, const GlobalOptions& opt);
void cmd_plan_snr(nlohmann::json config, const GlobalOptions& opt);

} // namespace photoncorr::cli
