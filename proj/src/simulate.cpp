#include "simulate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace sdefit {

int SimProtocol::observation_count() const {
  return static_cast<int>(std::lround(horizon / delta));
}

void SimProtocol::validate() const {
  if (!(fine_dt > 0.0) || fine_dt > delta)
    throw std::invalid_argument("SimProtocol: need 0 < fine_dt <= delta");
  if (!(delta > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("SimProtocol: delta and horizon must be positive");
  const int m = observation_count();
  if (m < 1 || m * delta > horizon + fine_dt)
    throw std::invalid_argument("SimProtocol: M·delta must not exceed horizon");
  if (replications < 1)
    throw std::invalid_argument("SimProtocol: replications must be >= 1");
}

Path simulate_path(const SdeModel& model, const Vector& theta, const Vector& x0, double t0,
                   const SimProtocol& protocol, std::uint32_t replication) {
  protocol.validate();
  const int m_obs = protocol.observation_count();
  const double t_last = (m_obs - 1) * protocol.delta;
  const auto steps = static_cast<std::size_t>(std::lround(t_last / protocol.fine_dt));
  const double dt = protocol.fine_dt;
  const double sqrt_dt = std::sqrt(dt);

  NormalStream wiener(
      derive_stream_seed(protocol.seed, replication, StreamPurpose::Wiener));

  Path path;
  path.t0 = t0;
  path.dt = dt;
  path.x.reserve(steps + 1);
  path.x.push_back(x0);

  const int d = model.d;
  const bool ll = protocol.scheme == SimScheme::LocalLinearization;
  Vector dw(model.m);

  Vector x = x0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    for (int i = 0; i < model.m; ++i)
      dw[i] = sqrt_dt * wiener.next();

    Vector x_next;
    if (!ll) {
      x_next = x + dt * model.drift(t, x, theta);
    } else {
      // Linearized drift advanced exactly over the step:
      // x_det = x + L e^{h Ms} r with Ms = [[A, ∂f/∂t, f],[0,0,1],[0,0,0]].
      Matrix ms = Matrix::Zero(d + 2, d + 2);
      ms.topLeftCorner(d, d) = model.drift_jac_x(t, x, theta);
      ms.block(0, d, d, 1) = model.drift_dt(t, x, theta);
      ms.block(0, d + 1, d, 1) = model.drift(t, x, theta);
      ms(d, d + 1) = 1.0;
      const Matrix e = expm(ms * dt);
      x_next = x + e.block(0, d + 1, d, 1);
    }
    for (int i = 0; i < model.m; ++i)
      x_next += model.diffusion[i](t, x, theta) * dw[i];

    if (!x_next.allFinite())
      throw NumericError("simulate_path: non-finite state at step " + std::to_string(n));
    path.x.push_back(x_next);
    x = std::move(x_next);
  }
  return path;
}

ObservationSeries make_observations(const Path& path, const SimProtocol& protocol,
                                    const ObservationModel& obs, std::uint32_t replication) {
  const int m_obs = protocol.observation_count();
  NormalStream noise(
      derive_stream_seed(protocol.seed, replication, StreamPurpose::ObsNoise));

  ObservationSeries series;
  series.grid.obs_times.resize(m_obs);
  series.z.resize(m_obs);
  for (int k = 0; k < m_obs; ++k) {
    const double tk = k * protocol.delta;
    const auto idx = static_cast<std::size_t>(std::lround(tk / path.dt));
    if (idx >= path.x.size())
      throw std::invalid_argument("make_observations: observation beyond simulated path");
    series.grid.obs_times[k] = path.t0 + tk;

    const Matrix pi = obs.Pi(k);
    Vector e = Vector::Zero(obs.r);
    if (pi.cwiseAbs().maxCoeff() > 0.0) {
      Eigen::LLT<Matrix> llt(pi);
      Matrix l;
      if (llt.info() == Eigen::Success) {
        l = llt.matrixL();
      } else {
        // PSD but rank-deficient Π: factor through the eigendecomposition.
        Eigen::SelfAdjointEigenSolver<Matrix> es(pi);
        l = es.eigenvectors() *
            es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      }
      Vector u(obs.r);
      for (int i = 0; i < obs.r; ++i)
        u[i] = noise.next();
      e = l * u;
    }
    series.z[k] = obs.C * path.x[idx] + e;
  }
  return series;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

} // namespace

std::string path_to_csv(const Path& path, int stride) {
  std::string out = "t";
  const int d = path.x.empty() ? 0 : static_cast<int>(path.x.front().size());
  for (int j = 1; j <= d; ++j)
    out += ",x" + std::to_string(j);
  out += "\n";
  for (std::size_t n = 0; n < path.x.size(); n += static_cast<std::size_t>(stride)) {
    append_number(out, path.t0 + static_cast<double>(n) * path.dt);
    for (int j = 0; j < d; ++j) {
      out += ',';
      append_number(out, path.x[n][j]);
    }
    out += "\n";
  }
  return out;
}

std::string series_to_csv(const ObservationSeries& series) {
  std::string out = "t";
  const int r = series.z.empty() ? 0 : static_cast<int>(series.z.front().size());
  for (int j = 1; j <= r; ++j)
    out += ",z" + std::to_string(j);
  out += "\n";
  for (std::size_t k = 0; k < series.z.size(); ++k) {
    append_number(out, series.grid.obs_times[k]);
    for (int j = 0; j < r; ++j) {
      out += ',';
      append_number(out, series.z[k][j]);
    }
    out += "\n";
  }
  return out;
}

} // namespace sdefit
