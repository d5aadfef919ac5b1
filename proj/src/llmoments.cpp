#include "llmoments.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"
#include "linalg.hpp"

namespace sdefit {

ItoTaylorCoeffs ito_taylor_coeffs(const SdeModel& model, int beta, double tau,
                                  const Vector& y, const Vector& theta) {
  if (beta != 1 && beta != 2)
    throw std::invalid_argument("ito_taylor_coeffs: beta must be 1 or 2");
  if (beta == 2 && !model.has_hessians())
    throw ModelError("ito_taylor_coeffs: beta=2 requires Hessian callbacks");

  ItoTaylorCoeffs c;
  c.A = model.drift_jac_x(tau, y, theta);
  c.a0 = model.drift(tau, y, theta) - c.A * y;
  c.a1 = model.drift_dt(tau, y, theta);
  c.B.resize(model.m);
  c.b0.resize(model.m);
  c.b1.resize(model.m);
  for (int i = 0; i < model.m; ++i) {
    c.B[i] = model.diffusion_jac_x[i](tau, y, theta);
    c.b0[i] = model.diffusion[i](tau, y, theta) - c.B[i] * y;
    c.b1[i] = model.diffusion_dt[i](tau, y, theta);
  }

  if (beta == 2) {
    Matrix g(model.d, model.m);
    for (int i = 0; i < model.m; ++i)
      g.col(i) = model.diffusion[i](tau, y, theta);
    const Matrix gg = g * g.transpose();
    const auto fh = model.drift_hess(tau, y, theta);
    for (int comp = 0; comp < model.d; ++comp)
      c.a1[comp] += 0.5 * gg.cwiseProduct(fh[comp]).sum();
    for (int i = 0; i < model.m; ++i) {
      const auto gh = model.diffusion_hess[i](tau, y, theta);
      for (int comp = 0; comp < model.d; ++comp)
        c.b1[i][comp] += 0.5 * gg.cwiseProduct(gh[comp]).sum();
    }
  }
  return c;
}

AugmentedSystem build_augmented(const SdeModel& model, int beta, double tau,
                                const MomentState& state, const Vector& theta) {
  const auto c = ito_taylor_coeffs(model, beta, tau, state.y, theta);
  const int d = model.d;
  const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
  const Eigen::Index n = d2 + 2 * d + 7;

  AugmentedSystem aug;
  aug.d = d;

  aug.Acal = kron_sum(c.A, c.A);
  for (int i = 0; i < model.m; ++i)
    aug.Acal += kron(c.B[i], c.B[i]);

  aug.beta1 = Matrix::Zero(d, d);
  aug.beta2 = Matrix::Zero(d, d);
  aug.beta3 = Matrix::Zero(d, d);
  aug.beta4 = kron_sum(c.a0, c.a0);
  aug.beta5 = kron_sum(c.a1, c.a1);
  for (int i = 0; i < model.m; ++i) {
    aug.beta1 += c.b0[i] * c.b0[i].transpose();
    aug.beta2 += c.b0[i] * c.b1[i].transpose() + c.b1[i] * c.b0[i].transpose();
    aug.beta3 += c.b1[i] * c.b1[i].transpose();
    aug.beta4 += kron(c.b0[i], c.B[i]) + kron(c.B[i], c.b0[i]);
    aug.beta5 += kron(c.b1[i], c.B[i]) + kron(c.B[i], c.b1[i]);
  }

  aug.C_block = Matrix::Zero(d + 2, d + 2);
  aug.C_block.topLeftCorner(d, d) = c.A;
  aug.C_block.block(0, d, d, 1) = c.a1;
  aug.C_block.block(0, d + 1, d, 1) = c.A * state.y + c.a0;
  aug.C_block(d, d + 1) = 1.0;

  // Selector L = [I_d 0_{d×2}]; ℬ₄ = β₄ L and ℬ₅ = β₅ L just zero-pad.
  Matrix b4_wide = Matrix::Zero(d2, d + 2);
  b4_wide.leftCols(d) = aug.beta4;
  Matrix b5_wide = Matrix::Zero(d2, d + 2);
  b5_wide.leftCols(d) = aug.beta5;

  aug.M = Matrix::Zero(n, n);
  aug.M.topLeftCorner(d2, d2) = aug.Acal;
  aug.M.block(0, d2, d2, d + 2) = b5_wide;
  aug.M.block(0, d2 + d + 2, d2, d + 2) = b4_wide;
  aug.M.block(0, d2 + 2 * d + 4, d2, 1) = vectorize(aug.beta3);
  aug.M.block(0, d2 + 2 * d + 5, d2, 1) =
      vectorize(aug.beta2) + aug.beta5 * state.y;
  aug.M.block(0, d2 + 2 * d + 6, d2, 1) =
      vectorize(aug.beta1) + aug.beta4 * state.y;
  aug.M.block(d2, d2, d + 2, d + 2) = aug.C_block;
  aug.M.block(d2, d2 + d + 2, d + 2, d + 2) = Matrix::Identity(d + 2, d + 2);
  aug.M.block(d2 + d + 2, d2 + d + 2, d + 2, d + 2) = aug.C_block;
  aug.M(d2 + 2 * d + 4, d2 + 2 * d + 5) = 2.0;
  aug.M(d2 + 2 * d + 5, d2 + 2 * d + 6) = 1.0;

  aug.u = Vector::Zero(n);
  aug.u.head(d2) = vectorize(state.P);
  aug.u[d2 + 2 * d + 3] = 1.0; // r = (0,..,0,1) of length d+2
  aug.u[n - 1] = 1.0;

  if (!aug.M.allFinite())
    throw NumericError("build_augmented: non-finite coefficients at tau=" +
                       std::to_string(tau));
  return aug;
}

MomentState predict_step(const SdeModel& model, int beta, const MomentState& state,
                         double t_target, const Vector& theta) {
  if (!(t_target >= state.t))
    throw std::invalid_argument("predict_step: t_target must be >= state.t");
  const double dt = t_target - state.t;
  const auto aug = build_augmented(model, beta, state.t, state, theta);

  Vector w;
  try {
    w = expm(aug.M * dt) * aug.u;
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + " (predict_step at t=" +
                       std::to_string(state.t) + ", dt=" + std::to_string(dt) + ")");
  }

  MomentState out;
  out.t = t_target;
  out.y = state.y + aug.mean_increment(w);
  Matrix p = unvectorize(aug.second_moment_vec(w), model.d, model.d);
  out.P = 0.5 * (p + p.transpose());
  if (!out.y.allFinite() || !out.P.allFinite())
    throw NumericError("predict_step: non-finite prediction at t=" +
                       std::to_string(t_target));
  return out;
}

} // namespace sdefit
