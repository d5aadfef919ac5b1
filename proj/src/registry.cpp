#include "registry.hpp"

#include <cmath>

#include "errors.hpp"

namespace sdefit {

namespace {

Vector vec1(double a) {
  Vector v(1);
  v[0] = a;
  return v;
}

Matrix mat1(double a) {
  Matrix m(1, 1);
  m(0, 0) = a;
  return m;
}

void check_box(const SdeModel& sde, const Vector& theta, const std::string& id) {
  if (theta.size() != sde.theta_dim)
    throw ModelError(id + ": theta has dimension " + std::to_string(theta.size()) +
                     ", expected " + std::to_string(sde.theta_dim));
  for (int j = 0; j < sde.theta_dim; ++j)
    if (theta[j] < sde.theta_lo[j] || theta[j] > sde.theta_hi[j])
      throw ModelError(id + ": theta[" + std::to_string(j) + "] outside the parameter box");
}

SdeModel::HessFn zero_hessians(int d) {
  return [d](double, const Vector&, const Vector&) {
    return std::vector<Matrix>(d, Matrix::Zero(d, d));
  };
}

TestModel make_ex1() {
  TestModel tm;
  tm.id = "ex1";
  tm.param_names = {"alpha", "sigma"};
  tm.theta0 = Vector(2);
  tm.theta0 << -0.1, 0.1;
  tm.t0 = 0.5;
  tm.has_exact_moments = true;
  tm.default_scheme = 0; // euler (multiplicative noise)

  SdeModel& s = tm.sde;
  s.d = 1;
  s.m = 1;
  s.theta_dim = 2;
  s.theta_lo = Vector(2);
  s.theta_lo << -0.6, 0.01;
  s.theta_hi = Vector(2);
  s.theta_hi << 0.3, 0.6;
  // dx = α t x dt + σ √t x dw
  s.drift = [](double t, const Vector& x, const Vector& th) { return vec1(th[0] * t * x[0]); };
  s.drift_jac_x = [](double t, const Vector&, const Vector& th) { return mat1(th[0] * t); };
  s.drift_dt = [](double, const Vector& x, const Vector& th) { return vec1(th[0] * x[0]); };
  s.diffusion = {[](double t, const Vector& x, const Vector& th) {
    return vec1(th[1] * std::sqrt(t) * x[0]);
  }};
  s.diffusion_jac_x = {[](double t, const Vector&, const Vector& th) {
    return mat1(th[1] * std::sqrt(t));
  }};
  s.diffusion_dt = {[](double t, const Vector& x, const Vector& th) {
    return vec1(0.5 * th[1] * x[0] / std::sqrt(t));
  }};
  s.drift_hess = zero_hessians(1);
  s.diffusion_hess = {zero_hessians(1)};

  tm.obs = constant_observation(Matrix::Identity(1, 1), mat1(1e-4));
  tm.init.x0_mean = vec1(1.0);
  tm.init.x0_second_moment = mat1(1.0);
  return tm;
}

TestModel make_ex2() {
  TestModel tm;
  tm.id = "ex2";
  tm.param_names = {"alpha", "sigma", "rho"};
  tm.theta0 = Vector(3);
  tm.theta0 << -0.25, 5.0, 0.1;
  tm.t0 = 0.01;
  tm.has_exact_moments = true;
  tm.default_scheme = 1; // local linearization (additive noise)

  SdeModel& s = tm.sde;
  s.d = 1;
  s.m = 2;
  s.theta_dim = 3;
  s.theta_lo = Vector(3);
  s.theta_lo << -1.0, 0.5, 1e-3;
  s.theta_hi = Vector(3);
  s.theta_hi << -0.01, 20.0, 1.0;
  // dx = α t x dt + σ t² e^{α t²/2} dw₁ + ρ √t dw₂
  s.drift = [](double t, const Vector& x, const Vector& th) { return vec1(th[0] * t * x[0]); };
  s.drift_jac_x = [](double t, const Vector&, const Vector& th) { return mat1(th[0] * t); };
  s.drift_dt = [](double, const Vector& x, const Vector& th) { return vec1(th[0] * x[0]); };
  s.diffusion = {
      [](double t, const Vector&, const Vector& th) {
        return vec1(th[1] * t * t * std::exp(0.5 * th[0] * t * t));
      },
      [](double t, const Vector&, const Vector& th) { return vec1(th[2] * std::sqrt(t)); }};
  s.diffusion_jac_x = {[](double, const Vector&, const Vector&) { return mat1(0.0); },
                       [](double, const Vector&, const Vector&) { return mat1(0.0); }};
  s.diffusion_dt = {
      [](double t, const Vector&, const Vector& th) {
        return vec1(th[1] * (2.0 * t + th[0] * t * t * t) * std::exp(0.5 * th[0] * t * t));
      },
      [](double t, const Vector&, const Vector& th) {
        return vec1(0.5 * th[2] / std::sqrt(t));
      }};
  s.drift_hess = zero_hessians(1);
  s.diffusion_hess = {zero_hessians(1), zero_hessians(1)};

  tm.obs = constant_observation(Matrix::Identity(1, 1), mat1(1e-4));
  tm.init.x0_mean = vec1(10.0);
  tm.init.x0_second_moment = mat1(100.0);
  return tm;
}

// Shared Van der Pol pieces for ex3/ex4.
SdeModel::HessFn vdp_drift_hess() {
  return [](double, const Vector& x, const Vector&) {
    std::vector<Matrix> h(2, Matrix::Zero(2, 2));
    h[1](0, 0) = -2.0 * x[1];
    h[1](0, 1) = -2.0 * x[0];
    h[1](1, 0) = -2.0 * x[0];
    return h;
  };
}

TestModel make_ex3() {
  TestModel tm;
  tm.id = "ex3";
  tm.param_names = {"alpha", "sigma"};
  tm.theta0 = Vector(2);
  tm.theta0 << 0.5, 0.75;
  tm.t0 = 0.0;
  tm.default_scheme = 1; // local linearization (additive noise)

  SdeModel& s = tm.sde;
  s.d = 2;
  s.m = 1;
  s.theta_dim = 2;
  s.theta_lo = Vector(2);
  s.theta_lo << -2.0, 0.01;
  s.theta_hi = Vector(2);
  s.theta_hi << 3.0, 3.0;
  // dx₁ = x₂ dt;  dx₂ = (-(x₁²-1)x₂ - x₁ + α) dt + σ dw
  s.drift = [](double, const Vector& x, const Vector& th) {
    Vector f(2);
    f << x[1], -(x[0] * x[0] - 1.0) * x[1] - x[0] + th[0];
    return f;
  };
  s.drift_jac_x = [](double, const Vector& x, const Vector&) {
    Matrix a(2, 2);
    a << 0.0, 1.0, -2.0 * x[0] * x[1] - 1.0, -(x[0] * x[0] - 1.0);
    return a;
  };
  s.drift_dt = [](double, const Vector&, const Vector&) { return Vector(Vector::Zero(2)); };
  s.diffusion = {[](double, const Vector&, const Vector& th) {
    Vector g(2);
    g << 0.0, th[1];
    return g;
  }};
  s.diffusion_jac_x = {[](double, const Vector&, const Vector&) {
    return Matrix(Matrix::Zero(2, 2));
  }};
  s.diffusion_dt = {[](double, const Vector&, const Vector&) {
    return Vector(Vector::Zero(2));
  }};
  s.drift_hess = vdp_drift_hess();
  s.diffusion_hess = {zero_hessians(2)};

  Matrix c(1, 2);
  c << 1.0, 0.0;
  tm.obs = constant_observation(c, mat1(1e-3));
  tm.init.x0_mean = Vector(2);
  tm.init.x0_mean << 1.0, 1.0;
  tm.init.x0_second_moment = tm.init.x0_mean * tm.init.x0_mean.transpose();
  return tm;
}

TestModel make_ex4() {
  TestModel tm;
  tm.id = "ex4";
  tm.param_names = {"alpha", "sigma"};
  tm.theta0 = Vector(2);
  tm.theta0 << 1.0, 1.0;
  tm.t0 = 0.0;
  tm.default_scheme = 0; // euler (multiplicative noise)

  SdeModel& s = tm.sde;
  s.d = 2;
  s.m = 1;
  s.theta_dim = 2;
  s.theta_lo = Vector(2);
  s.theta_lo << -2.0, 0.01;
  s.theta_hi = Vector(2);
  s.theta_hi << 4.0, 4.0;
  // dx₁ = x₂ dt;  dx₂ = (-(x₁²-1)x₂ - α x₁) dt + σ x₁ dw
  s.drift = [](double, const Vector& x, const Vector& th) {
    Vector f(2);
    f << x[1], -(x[0] * x[0] - 1.0) * x[1] - th[0] * x[0];
    return f;
  };
  s.drift_jac_x = [](double, const Vector& x, const Vector& th) {
    Matrix a(2, 2);
    a << 0.0, 1.0, -2.0 * x[0] * x[1] - th[0], -(x[0] * x[0] - 1.0);
    return a;
  };
  s.drift_dt = [](double, const Vector&, const Vector&) { return Vector(Vector::Zero(2)); };
  s.diffusion = {[](double, const Vector& x, const Vector& th) {
    Vector g(2);
    g << 0.0, th[1] * x[0];
    return g;
  }};
  s.diffusion_jac_x = {[](double, const Vector&, const Vector& th) {
    Matrix b = Matrix::Zero(2, 2);
    b(1, 0) = th[1];
    return b;
  }};
  s.diffusion_dt = {[](double, const Vector&, const Vector&) {
    return Vector(Vector::Zero(2));
  }};
  s.drift_hess = vdp_drift_hess();
  s.diffusion_hess = {zero_hessians(2)};

  Matrix c(1, 2);
  c << 1.0, 0.0;
  tm.obs = constant_observation(c, mat1(1e-3));
  tm.init.x0_mean = Vector(2);
  tm.init.x0_mean << 1.0, 1.0;
  tm.init.x0_second_moment = tm.init.x0_mean * tm.init.x0_mean.transpose();
  return tm;
}

} // namespace

std::vector<std::string> registry_ids() { return {"ex1", "ex2", "ex3", "ex4"}; }

TestModel test_model(const std::string& id, const Vector& theta) {
  TestModel tm;
  if (id == "ex1")
    tm = make_ex1();
  else if (id == "ex2")
    tm = make_ex2();
  else if (id == "ex3")
    tm = make_ex3();
  else if (id == "ex4")
    tm = make_ex4();
  else
    throw ModelError("unknown model id: " + id);

  if (theta.size() > 0) {
    check_box(tm.sde, theta, id);
    tm.theta0 = theta;
  }
  return tm;
}

ExactMoments exact_moment_oracle(const std::string& id, const Vector& theta, double x_filt,
                                 double q_filt, double t_k, double t_next) {
  if (!(t_next >= t_k))
    throw std::invalid_argument("exact_moment_oracle: t_next must be >= t_k");
  const double dt2 = t_next * t_next - t_k * t_k;
  if (id == "ex1") {
    const double alpha = theta[0], sigma = theta[1];
    return {x_filt * std::exp(0.5 * alpha * dt2),
            q_filt * std::exp((alpha + 0.5 * sigma * sigma) * dt2)};
  }
  if (id == "ex2") {
    const double alpha = theta[0], sigma = theta[1], rho = theta[2];
    const double c = rho * rho / (2.0 * alpha);
    const double dt5 = std::pow(t_next, 5) - std::pow(t_k, 5);
    const double q = (q_filt + c) * std::exp(alpha * dt2) +
                     (sigma * sigma / 5.0) * dt5 * std::exp(alpha * t_next * t_next) - c;
    return {x_filt * std::exp(0.5 * alpha * dt2), q};
  }
  throw ModelError("exact_moment_oracle: no closed form for model id: " + id);
}

} // namespace sdefit
