#ifndef SDEFIT_CONFIG_HPP
#define SDEFIT_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "simulate.hpp"

namespace sdefit {

/// Parsed experiment configuration. The text format is sectioned key=value
/// (see README); repeated keys override earlier ones, which is how CLI flag
/// overrides are appended.
struct ExperimentConfig {
  std::string model_id;
  std::uint64_t seed = 12345;
  int replications = 20;
  std::string out_dir; // optional; the CLI decides the final destination

  double delta = 1.0;
  double horizon = 10.0;
  double fine_dt = 1e-3;
  int scheme = -1; // -1 = registry default, 0 = euler, 1 = ll
  double pi_override = -1.0; // <0 = registry default

  std::vector<double> theta0; // empty = registry default
  double init_scale = 0.2;    // θ_init = θ0 · (1 + init_scale)

  bool use_exact = false;
  bool use_conventional = true;
  bool use_adaptive = false;
  std::vector<double> uniform_h;

  double rtol = 5e-6;
  double atol_y = 5e-9;
  double atol_p = 5e-12;

  OptimizerSettings opt;
};

/// Parses and validates; throws ConfigError with a 1-based line number for
/// syntax problems and a description for semantic ones.
ExperimentConfig parse_config(const std::string& text);

/// Canonical echo of a config; re-parses to an equivalent config.
std::string canonical_config(const ExperimentConfig& cfg);

} // namespace sdefit

#endif
