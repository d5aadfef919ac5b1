#include "model.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace sdefit {

ObservationModel constant_observation(const Matrix& c, const Matrix& pi) {
  ObservationModel obs;
  obs.C = c;
  obs.r = static_cast<int>(c.rows());
  Matrix p = pi;
  obs.Pi = [p](int) { return p; };
  return obs;
}

void TimeGrid::validate() const {
  if (obs_times.empty())
    throw std::invalid_argument("TimeGrid: empty observation grid");
  for (std::size_t k = 1; k < obs_times.size(); ++k)
    if (!(obs_times[k] > obs_times[k - 1]))
      throw std::invalid_argument("TimeGrid: obs_times not strictly increasing");
  if (fine_times.empty())
    return;
  for (std::size_t n = 1; n < fine_times.size(); ++n) {
    if (!(fine_times[n] > fine_times[n - 1]))
      throw std::invalid_argument("TimeGrid: fine_times not strictly increasing");
    if (h_max > 0.0 && fine_times[n] - fine_times[n - 1] > h_max * (1.0 + 1e-12))
      throw std::invalid_argument("TimeGrid: fine-grid gap exceeds h_max");
  }
  // (τ)_h must contain every observation time.
  std::size_t j = 0;
  for (double t : obs_times) {
    while (j < fine_times.size() && fine_times[j] < t - 1e-12)
      ++j;
    if (j >= fine_times.size() || std::abs(fine_times[j] - t) > 1e-9)
      throw std::invalid_argument("TimeGrid: fine grid does not contain obs time");
  }
}

void ObservationSeries::validate(int r) const {
  grid.validate();
  if (z.size() != grid.obs_times.size())
    throw std::invalid_argument("ObservationSeries: length(z) != M");
  for (const auto& zk : z) {
    if (zk.size() != r)
      throw std::invalid_argument("ObservationSeries: observation dimension mismatch");
    if (!zk.allFinite())
      throw std::invalid_argument("ObservationSeries: non-finite observation");
  }
}

double ValidationReport::max_discrepancy() const {
  double worst = 0.0;
  for (const auto& e : entries)
    worst = std::max(worst, e.max_discrepancy);
  return worst;
}

int ValidationReport::failed_probes() const {
  int n = 0;
  for (const auto& e : entries)
    n += e.failed_probes;
  return n;
}

namespace {

double rel_gap(double analytic, double fd) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(fd)});
  return std::abs(analytic - fd) / scale;
}

// Central finite difference of a vector-valued callback in one coordinate.
Vector central_diff(const std::function<Vector(double)>& f, double x0, double step) {
  return (f(x0 + step) - f(x0 - step)) / (2.0 * step);
}

void probe_jacobian(ValidationReport::Entry& entry, const Matrix& analytic,
                    const std::function<Vector(const Vector&)>& f, const Vector& x) {
  if (!analytic.allFinite()) {
    ++entry.failed_probes;
    return;
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    const Vector col = (f(xp) - f(xm)) / (2.0 * step);
    if (!col.allFinite()) {
      ++entry.failed_probes;
      return;
    }
    for (Eigen::Index i = 0; i < col.size(); ++i)
      entry.max_discrepancy = std::max(entry.max_discrepancy, rel_gap(analytic(i, j), col[i]));
  }
}

void probe_vector(ValidationReport::Entry& entry, const Vector& analytic, const Vector& fd) {
  if (!analytic.allFinite() || !fd.allFinite()) {
    ++entry.failed_probes;
    return;
  }
  for (Eigen::Index i = 0; i < analytic.size(); ++i)
    entry.max_discrepancy = std::max(entry.max_discrepancy, rel_gap(analytic[i], fd[i]));
}

} // namespace

ValidationReport validate_model(const SdeModel& model, int n_probes, std::uint64_t seed) {
  if (n_probes < 1)
    throw std::invalid_argument("validate_model: n_probes must be >= 1");

  ValidationReport report;
  report.entries.reserve(3 + 2 * static_cast<std::size_t>(model.m));
  auto& drift_jac = report.entries.emplace_back();
  drift_jac.callback = "drift_jac_x";
  auto& drift_dt = report.entries.emplace_back();
  drift_dt.callback = "drift_dt";
  std::vector<ValidationReport::Entry*> diff_jac(model.m), diff_dt(model.m);
  for (int i = 0; i < model.m; ++i) {
    auto& ej = report.entries.emplace_back();
    ej.callback = "diffusion_jac_x[" + std::to_string(i) + "]";
    diff_jac[i] = &report.entries.back();
  }
  for (int i = 0; i < model.m; ++i) {
    auto& et = report.entries.emplace_back();
    et.callback = "diffusion_dt[" + std::to_string(i) + "]";
    diff_dt[i] = &report.entries.back();
  }
  ValidationReport::Entry* drift_hess_entry = nullptr;
  if (model.has_hessians()) {
    auto& eh = report.entries.emplace_back();
    eh.callback = "drift_hess";
    drift_hess_entry = &report.entries.back();
  }

  NormalStream stream(derive_stream_seed(seed, 0, StreamPurpose::Probe));
  auto uniform = [&stream](double lo, double hi) {
    return lo + (hi - lo) * stream.next_uniform();
  };

  for (int probe = 0; probe < n_probes; ++probe) {
    const double t = uniform(0.5, 1.5);
    Vector x(model.d);
    for (int j = 0; j < model.d; ++j)
      x[j] = uniform(0.5, 1.5);
    Vector theta(model.theta_dim);
    for (int j = 0; j < model.theta_dim; ++j) {
      const double lo = model.theta_lo.size() ? model.theta_lo[j] : -1.0;
      const double hi = model.theta_hi.size() ? model.theta_hi[j] : 1.0;
      theta[j] = uniform(lo, hi);
    }

    const double tstep = 1e-5 * std::max(1.0, std::abs(t));

    probe_jacobian(drift_jac, model.drift_jac_x(t, x, theta),
                   [&](const Vector& xx) { return model.drift(t, xx, theta); }, x);
    probe_vector(drift_dt, model.drift_dt(t, x, theta),
                 central_diff([&](double tt) { return model.drift(tt, x, theta); }, t, tstep));

    for (int i = 0; i < model.m; ++i) {
      probe_jacobian(*diff_jac[i], model.diffusion_jac_x[i](t, x, theta),
                     [&](const Vector& xx) { return model.diffusion[i](t, xx, theta); }, x);
      probe_vector(*diff_dt[i], model.diffusion_dt[i](t, x, theta),
                   central_diff([&](double tt) { return model.diffusion[i](tt, x, theta); },
                                t, tstep));
    }

    if (drift_hess_entry) {
      // Hessian rows against finite differences of the analytic Jacobian.
      const auto hess = model.drift_hess(t, x, theta);
      for (int comp = 0; comp < model.d; ++comp) {
        probe_jacobian(*drift_hess_entry, hess[comp],
                       [&](const Vector& xx) {
                         return Vector(model.drift_jac_x(t, xx, theta).row(comp).transpose());
                       },
                       x);
      }
    }
  }

  report.status = report.failed_probes() == 0 ? "ok" : "failed";
  return report;
}

std::pair<SdeModel, ObservationModel>
augment_nonlinear_observation(const SdeModel& model, const ObsFunction& h, const Matrix& pi) {
  if (!h.hess_x)
    throw ModelError("augment_nonlinear_observation: Hessian of h is required");
  if (!h.value || !h.jac_x || !h.dt)
    throw ModelError("augment_nonlinear_observation: h needs value, dt and jac_x");

  const int d = model.d;
  const int m = model.m;
  const int r = h.r;
  const int da = d + r;

  SdeModel base = model; // keep the original callbacks alive by value

  auto drift_aug = [base, h, d, r](double t, const Vector& v, const Vector& theta) {
    const Vector x = v.head(d);
    const Vector f = base.drift(t, x, theta);
    const Matrix jh = h.jac_x(t, x);
    const auto hess = h.hess_x(t, x);
    Vector rho = h.dt(t, x) + jh * f;
    for (int s = 0; s < base.m; ++s) {
      const Vector gs = base.diffusion[s](t, x, theta);
      for (int j = 0; j < r; ++j)
        rho[j] += 0.5 * gs.dot(hess[j] * gs);
    }
    Vector out(d + r);
    out << f, rho;
    return out;
  };

  std::vector<SdeModel::VecFn> diffusion_aug(m);
  for (int i = 0; i < m; ++i) {
    diffusion_aug[i] = [base, h, d, r, i](double t, const Vector& v, const Vector& theta) {
      const Vector x = v.head(d);
      const Vector gi = base.diffusion[i](t, x, theta);
      Vector out(d + r);
      out << gi, h.jac_x(t, x) * gi;
      return out;
    };
  }

  auto fd_jac = [da](const SdeModel::VecFn& f) {
    return [f, da](double t, const Vector& v, const Vector& theta) {
      Matrix jac(da, da);
      for (int j = 0; j < da; ++j) {
        const double step = 1e-6 * std::max(1.0, std::abs(v[j]));
        Vector vp = v, vm = v;
        vp[j] += step;
        vm[j] -= step;
        jac.col(j) = (f(t, vp, theta) - f(t, vm, theta)) / (2.0 * step);
      }
      return jac;
    };
  };
  auto fd_dt = [](const SdeModel::VecFn& f) {
    return [f](double t, const Vector& v, const Vector& theta) {
      const double step = 1e-6 * std::max(1.0, std::abs(t));
      return Vector((f(t + step, v, theta) - f(t - step, v, theta)) / (2.0 * step));
    };
  };

  SdeModel aug;
  aug.d = da;
  aug.m = m;
  aug.theta_dim = model.theta_dim;
  aug.theta_lo = model.theta_lo;
  aug.theta_hi = model.theta_hi;
  aug.drift = drift_aug;
  aug.drift_jac_x = fd_jac(drift_aug);
  aug.drift_dt = fd_dt(drift_aug);
  aug.diffusion = diffusion_aug;
  aug.diffusion_jac_x.resize(m);
  aug.diffusion_dt.resize(m);
  for (int i = 0; i < m; ++i) {
    aug.diffusion_jac_x[i] = fd_jac(diffusion_aug[i]);
    aug.diffusion_dt[i] = fd_dt(diffusion_aug[i]);
  }

  Matrix c = Matrix::Zero(r, da);
  c.rightCols(r) = Matrix::Identity(r, r);
  Matrix noise = pi.size() ? pi : Matrix::Zero(r, r);
  return {std::move(aug), constant_observation(c, noise)};
}

} // namespace sdefit
