#ifndef SDEFIT_LLMOMENTS_HPP
#define SDEFIT_LLMOMENTS_HPP

#include <vector>

#include "model.hpp"

namespace sdefit {

/// Coefficients of the order-β Ito-Taylor expansions of drift and diffusion
/// around (τ, y):
///   a(t) ≈ A y + a0 + a1 (t-τ),   g_i(t) ≈ B_i y + b_{i,0} + b_{i,1} (t-τ).
/// For β = 1: a0 = f - A y, a1 = ∂f/∂τ (and likewise for each diffusion).
/// For β = 2 the (t-τ) coefficients gain the ½ Σ [GGᵀ]^{jl} ∂²(·)/∂y^j∂y^l
/// correction, which requires the Hessian callbacks.
struct ItoTaylorCoeffs {
  Vector a0, a1;
  std::vector<Vector> b0, b1; // per Wiener index
  Matrix A;
  std::vector<Matrix> B;
};

ItoTaylorCoeffs ito_taylor_coeffs(const SdeModel& model, int beta, double tau,
                                  const Vector& y, const Vector& theta);

/// Conditional-moment pair (y_{t/t_k}, P_{t/t_k}) carried between
/// observations. P is the second moment; the variance is P - y yᵀ.
struct MomentState {
  double t = 0.0;
  Vector y;
  Matrix P;

  Matrix variance() const { return P - y * y.transpose(); }
};

/// The (d²+2d+7)-dimensional augmented system whose single matrix
/// exponential advances both conditional moments over one fine-grid step:
///
///         ⎡ 𝒜   ℬ₅   ℬ₄   ℬ₃  ℬ₂  ℬ₁ ⎤        ⎡ vec(P) ⎤
///         ⎢ 0    C   I     0   0   0 ⎥        ⎢   0    ⎥
///   M  =  ⎢ 0    0   C     0   0   0 ⎥ ,  u = ⎢   r    ⎥
///         ⎢ 0    0   0     0   2   0 ⎥        ⎢   0    ⎥
///         ⎢ 0    0   0     0   0   1 ⎥        ⎢   0    ⎥
///         ⎣ 0    0   0     0   0   0 ⎦        ⎣   1    ⎦
///
/// with 𝒜 = A⊕A + Σ B_i⊗B_i, C carrying [A, a1, A y + a0] in its top block
/// and r = (0,..,0,1) of length d+2. The mean update reads the head of the
/// r-block (selector L₂), the second moment the leading d² entries (L₁).
struct AugmentedSystem {
  int d = 0;
  Matrix M; // (d²+2d+7)²
  Vector u;

  // Exposed pieces (block-structure tests, diagnostics).
  Matrix Acal;                  // d²×d²
  Matrix C_block;               // (d+2)×(d+2)
  Matrix beta1, beta2, beta3;   // d×d
  Matrix beta4, beta5;          // d²×d

  Eigen::Index size() const { return M.rows(); }
  /// L₂·w : the d mean-increment components of an augmented state vector.
  Vector mean_increment(const Vector& w) const {
    return w.segment(static_cast<Eigen::Index>(d) * d + d + 2, d);
  }
  /// L₁·w : the leading d² components, vec of the propagated second moment.
  Vector second_moment_vec(const Vector& w) const {
    return w.head(static_cast<Eigen::Index>(d) * d);
  }
};

AugmentedSystem build_augmented(const SdeModel& model, int beta, double tau,
                                const MomentState& state, const Vector& theta);

/// One prediction step of the order-β LL filter (a single matrix
/// exponential): y⁺ = y + L₂ e^{M Δ} u and vec(P⁺) = L₁ e^{M Δ} u, with the
/// augmented system rebuilt at the step's start node and P⁺ symmetrized.
MomentState predict_step(const SdeModel& model, int beta, const MomentState& state,
                         double t_target, const Vector& theta);

} // namespace sdefit

#endif
