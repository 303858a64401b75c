// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace photoncorr {

/// Malformed or out-of-range run configuration / input data.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric validity condition was violated (outside the linear regime,
/// truncation too small, undefined ratio, ...).
struct regime_error : std::runtime_error {
    explicit regime_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace photoncorr
