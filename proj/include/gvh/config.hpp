#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gvh/hedge.hpp"
#include "gvh/kernel.hpp"
#include "gvh/model.hpp"
#include "gvh/payoff.hpp"
#include "gvh/time_grid.hpp"

namespace gvh {

/// Fully resolved experiment description. Every default is materialized by
/// parse_config so that resolved_json() reproduces the run.
struct ExperimentConfig {
  // model
  std::string model_kind = "brownian";  ///< brownian | fbm | mixed_fbm | custom
  double hurst = 0.5;                   ///< meaningful for fbm / mixed_fbm
  std::string covariance;               ///< named covariance for custom
  std::string kernel = "cholesky";      ///< cholesky | analytic | auto

  // market
  double s0 = 100.0;
  double maturity = 1.0;
  std::string drift_kind = "constant";  ///< constant | piecewise_linear
  double drift_rate = 0.1;
  std::vector<std::pair<double, double>> drift_knots;

  std::size_t steps = 64;

  /// Trading times strictly inside (0, T), already snapped to the grid.
  /// t = 0 is always a trading time and is not listed.
  std::vector<double> trading_times;

  std::string payoff_kind = "call";  ///< call | put | identity | constant
  double strike = 100.0;
  double payoff_value = 1.0;

  double cost = 0.0;
  std::string init = "recursive";  ///< recursive | min_cost

  std::size_t paths = 100;
  std::uint64_t seed = 1;

  int quad_order = 64;

  double condition_time = 0.5;  ///< prediction conditioning time, on the grid
  std::size_t continuations = 2000;

  std::string output_dir;  ///< empty: decided by the command line / environment

  /// Non-fatal adjustments made while resolving (trading-time snapping).
  std::vector<std::string> warnings;
};

/// Parses JSON text. Unknown keys, missing required values, type mismatches
/// and range violations raise ConfigError naming the key path.
ExperimentConfig parse_config(std::string_view text);

/// Canonical resolved configuration (sorted keys, compact). The output
/// directory is included only when `with_output` is set.
std::string resolved_json(const ExperimentConfig& cfg, bool with_output = true);

/// 16 hex digits of FNV-1a over resolved_json(cfg, false).
std::string config_hash(const ExperimentConfig& cfg);

NoiseModel make_noise(const ExperimentConfig& cfg);
MarketModel make_market(const ExperimentConfig& cfg);
TimeGrid make_grid(const ExperimentConfig& cfg);
KernelMethod kernel_method(const ExperimentConfig& cfg);
EuropeanPayoff make_payoff(const ExperimentConfig& cfg);
InitPolicy init_policy(const ExperimentConfig& cfg);

/// Grid indices of the trading times, starting with 0.
std::vector<std::size_t> trading_indices(const ExperimentConfig& cfg, const TimeGrid& grid);

/// Grid index of the prediction conditioning time.
std::size_t condition_index(const ExperimentConfig& cfg, const TimeGrid& grid);

}  // namespace gvh
