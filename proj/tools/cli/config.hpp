#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "zefoz/spin_algebra.hpp"
#include "zefoz/tensors.hpp"

namespace zefoz::cli {

/// One tensor set as read from a JSON configuration file.
///
///   {
///     "name": "site1_pr_yso",              (optional)
///     "spin_two_I": 5,
///     "q_principal_MHz": {"E": 0.5624, "D": 4.4450},
///     "g_principal_kHz_per_G": [2.86, 3.05, 11.56],
///     "euler_deg": [-99.7, 55.7, -40.0],
///     "euler_convention": "zyz",
///     "c2_axis": [0, 1, 0]                  (optional, default y)
///   }
///
/// Unknown keys are rejected.
struct SystemConfig {
    std::string name;
    int spin_two_i = 5;
    TensorParams tensors;
    Vec3 c2_axis = Vec3::UnitY();

    /// 16 hex digits of FNV-1a over the canonical form of the config.
    std::string hash() const;
    std::string canonical_json() const;
};

/// Throws Error(configuration) naming the offending key.
SystemConfig parse_config(std::string_view json_text);
SystemConfig load_config(const std::string& path);

/// Config with the Euler convention replaced, when `tag` is set.
SystemConfig with_convention(SystemConfig config, const std::optional<std::string>& tag);

struct LoadedSystem {
    SystemConfig config;
    SpinSystem spin;
    InteractionTensors tensors;
};

LoadedSystem instantiate(const SystemConfig& config);

}  // namespace zefoz::cli
