#ifndef SDEFIT_ESTIMATOR_HPP
#define SDEFIT_ESTIMATOR_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "filter.hpp"
#include "model.hpp"

namespace sdefit {

enum class EstimatorMode { Exact, Conventional, Uniform, Adaptive };

std::string mode_name(EstimatorMode mode);

/// Everything a likelihood evaluation needs besides data and θ. exact_id is
/// the registry id when closed-form moments exist (enables Exact mode).
struct EstimationProblem {
  SdeModel model;
  ObservationModel obs;
  InitialCondition init;
  std::string exact_id;
};

struct EstimatorConfig {
  EstimatorMode mode = EstimatorMode::Conventional;
  double h = 0.0;      // Uniform mode step
  FilterConfig filter; // β, adaptive tolerances, jitter

  FilterConfig filter_config(void) const;
};

/// Innovation negative log-likelihood
///   U = (M-1)·ln 2π + Σ_{k=1}^{M-1} [ln det Σ_k + ν_kᵀ Σ_k⁻¹ ν_k].
/// The k=0 observation initializes the filter but contributes no term.
/// A filter failure is reported as status ok=false with value +∞ so the
/// optimizer can retreat instead of aborting.
struct NllEvaluation {
  Vector theta;
  double value = 0.0;
  std::vector<std::pair<double, double>> per_term; // (ln det Σ_k, ν_kᵀΣ_k⁻¹ν_k)
  bool ok = false;
};

NllEvaluation innovation_nll(const EstimationProblem& problem, const ObservationSeries& data,
                             const Vector& theta, const EstimatorConfig& cfg);

struct OptimizerSettings {
  double xtol = 1e-7;  // simplex diameter
  double ftol = 1e-10; // value spread
  int max_evals = 600; // per pass; one restart pass from the incumbent
  double init_step = 0.05; // initial simplex step, fraction of box width
};

/// Derivative-free Nelder-Mead with trial points projected into [lo, hi].
/// Exposed directly so surrogate objectives can exercise it.
struct SimplexResult {
  Vector x;
  double f = 0.0;
  int evals = 0;
  int iterations = 0;
  bool converged = false;
};
SimplexResult minimize_simplex(const std::function<double(const Vector&)>& f,
                               const Vector& x0, const Vector& lo, const Vector& hi,
                               const OptimizerSettings& opt);

struct EstimationResult {
  Vector theta_hat;
  double nll = 0.0;
  int iterations = 0;
  int nll_evals = 0;
  bool converged = false;
  EstimatorMode mode = EstimatorMode::Conventional;
  double h = 0.0;
  // Step bookkeeping from one filter run at θ̂.
  long accepted_total = 0;
  long failed_total = 0;
  std::vector<int> accepted_per_obs;
  std::vector<int> failed_per_obs;
};

EstimationResult estimate(const EstimationProblem& problem, const ObservationSeries& data,
                          const Vector& theta_init, const EstimatorConfig& cfg,
                          const OptimizerSettings& opt);

/// One estimator flavor inside a suite: mode plus its uniform step when
/// applicable.
struct ModeSpec {
  EstimatorMode mode = EstimatorMode::Conventional;
  double h = 0.0;

  std::string label() const;
};

struct SuiteSummaryRow {
  ModeSpec mode;
  int param = 0;
  int n_ok = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double bias = 0.0; // mean - θ0
  // Populated when the suite contains an Exact mode:
  std::optional<double> err_vs_exact_mean; // mean |θ̂_exact - θ̂_mode|
  std::optional<double> err_vs_exact_std;
  std::optional<double> diff_vs_exact; // mean θ̂_mode - mean θ̂_exact
};

struct SuiteResult {
  std::vector<ModeSpec> modes;
  // results[mode][replication]; nullopt marks a recorded failure.
  std::vector<std::vector<std::optional<EstimationResult>>> results;
  std::vector<std::string> failure_messages;
  std::vector<SuiteSummaryRow> summary;
  int failures = 0;
};

/// Runs every requested estimator over a batch of replications and reduces
/// the per-replication estimates into Table-style summary rows. Exact mode
/// requires problem.exact_id. Per-replication failures are recorded,
/// excluded from the summaries, and counted. Replications run concurrently
/// on `threads` workers; the reduction order is fixed.
SuiteResult estimator_suite(const EstimationProblem& problem,
                            const std::vector<ObservationSeries>& batch,
                            const std::vector<ModeSpec>& modes, const Vector& theta0,
                            const Vector& theta_init, const EstimatorConfig& base_cfg,
                            const OptimizerSettings& opt, int threads);

} // namespace sdefit

#endif
