#ifndef SDEFIT_MODEL_HPP
#define SDEFIT_MODEL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace sdefit {

/// Continuous state equation
///   dx = f(t,x;θ) dt + Σ_{i=1..m} g_i(t,x;θ) dw_i
/// with user-supplied derivatives. Callbacks must be pure and reentrant;
/// the model itself is immutable after construction and safe to share
/// across concurrent replications.
///
/// Hessian callbacks are optional: they are only required when building
/// order-2 moment coefficients.
struct SdeModel {
  using VecFn = std::function<Vector(double t, const Vector& x, const Vector& theta)>;
  using MatFn = std::function<Matrix(double t, const Vector& x, const Vector& theta)>;
  // One d×d Hessian per output component.
  using HessFn =
      std::function<std::vector<Matrix>(double t, const Vector& x, const Vector& theta)>;

  int d = 0; // state dimension
  int m = 0; // number of Wiener processes

  VecFn drift;                       // f
  std::vector<VecFn> diffusion;      // g_i, i = 0..m-1
  MatFn drift_jac_x;                 // ∂f/∂x, d×d
  VecFn drift_dt;                    // ∂f/∂t
  std::vector<MatFn> diffusion_jac_x; // ∂g_i/∂x
  std::vector<VecFn> diffusion_dt;   // ∂g_i/∂t

  HessFn drift_hess;                    // optional
  std::vector<HessFn> diffusion_hess;   // optional, m entries when present

  int theta_dim = 0;
  Vector theta_lo, theta_hi; // compact parameter box

  bool has_hessians() const {
    return static_cast<bool>(drift_hess) && static_cast<int>(diffusion_hess.size()) == m;
  }
};

/// Discrete observation equation z_k = C x(t_k) + e_k, e_k ~ N(0, Π_k).
/// Π may vary with the observation index. C need not have full row rank.
struct ObservationModel {
  Matrix C; // r×d
  std::function<Matrix(int k)> Pi;
  int r = 0;
};

ObservationModel constant_observation(const Matrix& c, const Matrix& pi);

/// Observation grid {t}_M with an optional fine grid (τ)_h ⊇ {t}_M.
struct TimeGrid {
  std::vector<double> obs_times;
  std::vector<double> fine_times; // empty when no fine grid is attached
  double h_max = 0.0;

  /// Throws std::invalid_argument when strict increase / containment /
  /// max-gap invariants are violated.
  void validate() const;
};

struct ObservationSeries {
  TimeGrid grid;
  std::vector<Vector> z; // one r-vector per obs_time, all entries finite

  void validate(int r) const;
};

/// Filter start values (x_{t0/t0}, Q_{t0/t0}); the second moment minus
/// mean·meanᵀ must be PSD.
struct InitialCondition {
  Vector x0_mean;
  Matrix x0_second_moment;
};

/// Finite-difference validation of the analytic derivative callbacks over
/// random probe points (t, x, θ): t and x uniform in a unit box around the
/// nominal point (t=1, x=1), θ uniform in the model's box.
struct ValidationReport {
  struct Entry {
    std::string callback;
    double max_discrepancy = 0.0; // |analytic-fd| / max(1, |analytic|, |fd|)
    int failed_probes = 0;        // probes with non-finite callback output
  };
  std::vector<Entry> entries;
  std::string status; // "ok" | "failed"

  double max_discrepancy() const;
  int failed_probes() const;
  bool passes(double tol) const { return status == "ok" && max_discrepancy() <= tol; }
};

ValidationReport validate_model(const SdeModel& model, int n_probes, std::uint64_t seed);

/// Twice-differentiable observation map h(t,x) with supplied derivatives,
/// used by augment_nonlinear_observation.
struct ObsFunction {
  int r = 0;
  std::function<Vector(double t, const Vector& x)> value;
  std::function<Vector(double t, const Vector& x)> dt;      // ∂h/∂t
  std::function<Matrix(double t, const Vector& x)> jac_x;   // ∂h/∂x, r×d
  // One d×d Hessian per observation component; required.
  std::function<std::vector<Matrix>(double t, const Vector& x)> hess_x;
};

/// Ito-formula augmentation of a nonlinear observation: returns the
/// (d+r)-dimensional model for v = [x; h(t,x)] with drift [f; ρ] and
/// diffusions [g_i; σ_i], plus the linear ObservationModel whose C selects
/// the trailing r components. Π of the returned observation model is `pi`
/// (defaults to zero noise).
///
/// The augmented model's Jacobian callbacks are finite-difference backed:
/// analytic Jacobians of ρ would require third derivatives of h, which the
/// interface does not carry. Hessians are not provided (order-1 only).
std::pair<SdeModel, ObservationModel>
augment_nonlinear_observation(const SdeModel& model, const ObsFunction& h,
                              const Matrix& pi = Matrix());

} // namespace sdefit

#endif
