#ifndef SDEFIT_FILTER_HPP
#define SDEFIT_FILTER_HPP

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "llmoments.hpp"
#include "model.hpp"

namespace sdefit {

enum class GridMode { Uniform, Adaptive };

struct FilterConfig {
  int beta = 1;
  GridMode grid_mode = GridMode::Uniform;

  /// Uniform mode: each inter-observation interval is subdivided into
  /// ceil((t_{k+1}-t_k)/h) equal steps. h >= interval gives the conventional
  /// LL filter (one linearization per interval).
  double h = std::numeric_limits<double>::infinity();

  // Adaptive mode: step-doubling local error control.
  double atol_y = 5e-9;
  double rtol_y = 5e-6;
  double atol_P = 5e-12;
  double rtol_P = 5e-6;
  double h_init = 0.0; // 0 = start at the interval length
  double h_min = 1e-10;
  double h_max = std::numeric_limits<double>::infinity();
  double safety = 0.8;

  /// Relative jitter floor for the innovation covariance: a failing
  /// factorization gets one bump of jitter·trace(Σ)/r·I; a second failure
  /// aborts the run.
  double jitter = 1e-12;

  void validate() const;
};

/// Per-observation filter records. Index k runs over the observation grid;
/// entry 0 holds only the initial filter values (no update happens at t_0,
/// the k=0 observation enters no likelihood term).
struct FilterTrace {
  std::vector<double> t;
  std::vector<Vector> y_pred;  // y_{t_k/t_{k-1}}, k >= 1
  std::vector<Matrix> V_pred;  // V_{t_k/t_{k-1}}
  std::vector<Vector> nu;      // innovations
  std::vector<Matrix> Sigma;   // innovation covariances (post-jitter)
  std::vector<Matrix> K;       // filter gains
  std::vector<Vector> y_filt;  // y_{t_k/t_k}
  std::vector<Matrix> P_filt;  // P_{t_k/t_k}
  std::vector<int> accepted_steps; // per interval (t_{k-1}, t_k]
  std::vector<int> failed_steps;

  std::size_t observations() const { return t.size(); }
  long total_accepted() const;
  long total_failed() const;
};

struct MeasurementUpdate {
  Vector y;
  Matrix V;
  Matrix P;
  Vector nu;
  Matrix Sigma;
  Matrix K;
};

/// Kalman-type update at one observation:
///   Σ = C V Cᵀ + Π_k,  K = V Cᵀ Σ⁻¹,  y⁺ = y + K ν,  V⁺ = V - K C V,
///   P⁺ = V⁺ + y⁺ y⁺ᵀ.
MeasurementUpdate measurement_update(const Vector& y_pred, const Matrix& v_pred,
                                     const Vector& z, const ObservationModel& obs, int k,
                                     double jitter = 1e-12);

/// Predictor contract used by the shared filter loop: advance the filtered
/// moments to t_next and report (accepted, failed) step counts.
using Predictor = std::function<MomentState(const MomentState& from, double t_next,
                                            int& accepted, int& failed)>;

FilterTrace run_filter_core(const Predictor& predict, const ObservationModel& obs,
                            const ObservationSeries& data, const InitialCondition& init,
                            double jitter);

/// Order-β LL filter over the configured fine grid.
FilterTrace run_filter(const SdeModel& model, const ObservationModel& obs,
                       const ObservationSeries& data, const InitialCondition& init,
                       const Vector& theta, const FilterConfig& cfg);

/// Exact LMV filter for the registry models with closed-form moments
/// (ex1/ex2); grid-free by construction.
FilterTrace exact_lmv_filter(const std::string& id, const ObservationModel& obs,
                             const ObservationSeries& data, const InitialCondition& init,
                             const Vector& theta, double jitter = 1e-12);

} // namespace sdefit

#endif
