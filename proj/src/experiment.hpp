#ifndef SDEFIT_EXPERIMENT_HPP
#define SDEFIT_EXPERIMENT_HPP

#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace sdefit {

/// Named output tables (CSV text, plus manifest.txt). The producer is fully
/// deterministic in (config, seed): same inputs give byte-identical tables.
struct ExperimentTables {
  std::vector<std::pair<std::string, std::string>> tables;

  const std::string* find(const std::string& name) const;
};

/// Replication loop -> estimator suite -> Table-style CSVs:
///   estimates.csv   one row per (replication, mode, h)
///   summary.csv     per-mode/parameter mean, std, bias, error-vs-exact rows
///   histogram_<param>_<mode>.csv  Freedman-Diaconis bins + 5%/95% limits
///   steps.csv       per-observation accepted/failed step averages
///   manifest.txt    canonical config echo + version + failure log
ExperimentTables run_experiment(const ExperimentConfig& cfg, int threads);

/// Convergence study on one fixed dataset (ex1/ex2): |θ̂(h) - θ̂_exact| per
/// rung of the h-ladder plus fitted log-log slopes. Tables: convergence.csv,
/// slopes.csv (empty below two rungs), manifest.txt.
ExperimentTables run_convergence_check(const std::string& model_id,
                                       const std::vector<double>& h_ladder, double delta,
                                       double horizon, double fine_dt, std::uint64_t seed,
                                       int threads);

} // namespace sdefit

#endif
