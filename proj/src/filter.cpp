#include "filter.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "errors.hpp"
#include "linalg.hpp"
#include "registry.hpp"

namespace sdefit {

void FilterConfig::validate() const {
  if (beta != 1 && beta != 2)
    throw std::invalid_argument("FilterConfig: beta must be 1 or 2");
  if (grid_mode == GridMode::Uniform) {
    if (!(h > 0.0))
      throw std::invalid_argument("FilterConfig: uniform h must be positive");
    return;
  }
  if (!(atol_y > 0.0 && rtol_y > 0.0 && atol_P > 0.0 && rtol_P > 0.0))
    throw std::invalid_argument("FilterConfig: tolerances must be positive");
  if (!(safety > 0.0 && safety < 1.0))
    throw std::invalid_argument("FilterConfig: safety must lie in (0,1)");
  if (!(h_min > 0.0) || h_min > h_max)
    throw std::invalid_argument("FilterConfig: need 0 < h_min <= h_max");
  if (h_init != 0.0 && (h_init < h_min || h_init > h_max))
    throw std::invalid_argument("FilterConfig: need h_min <= h_init <= h_max");
}

long FilterTrace::total_accepted() const {
  long n = 0;
  for (int a : accepted_steps)
    n += a;
  return n;
}

long FilterTrace::total_failed() const {
  long n = 0;
  for (int f : failed_steps)
    n += f;
  return n;
}

MeasurementUpdate measurement_update(const Vector& y_pred, const Matrix& v_pred,
                                     const Vector& z, const ObservationModel& obs, int k,
                                     double jitter) {
  const Matrix v = psd_repair(v_pred, 0.0);
  Matrix sigma = obs.C * v * obs.C.transpose() + obs.Pi(k);
  sigma = 0.5 * (sigma + sigma.transpose());

  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    sigma += jitter * (sigma.trace() / obs.r) * Matrix::Identity(obs.r, obs.r);
    llt.compute(sigma);
    if (llt.info() != Eigen::Success)
      throw FilterError("innovation covariance singular after jitter at k=" +
                        std::to_string(k));
  }

  MeasurementUpdate up;
  up.Sigma = sigma;
  up.K = llt.solve(obs.C * v).transpose(); // V Cᵀ Σ⁻¹, via symmetry of V and Σ
  up.nu = z - obs.C * y_pred;
  up.y = y_pred + up.K * up.nu;
  Matrix vn = v - up.K * obs.C * v;
  up.V = 0.5 * (vn + vn.transpose());
  up.P = up.V + up.y * up.y.transpose();
  return up;
}

FilterTrace run_filter_core(const Predictor& predict, const ObservationModel& obs,
                            const ObservationSeries& data, const InitialCondition& init,
                            double jitter) {
  data.validate(obs.r);
  const std::size_t M = data.z.size();
  const auto& times = data.grid.obs_times;

  FilterTrace tr;
  tr.t = times;
  tr.y_pred.resize(M);
  tr.V_pred.resize(M);
  tr.nu.resize(M);
  tr.Sigma.resize(M);
  tr.K.resize(M);
  tr.y_filt.resize(M);
  tr.P_filt.resize(M);
  tr.accepted_steps.assign(M, 0);
  tr.failed_steps.assign(M, 0);

  tr.y_filt[0] = init.x0_mean;
  tr.P_filt[0] = init.x0_second_moment;
  MomentState state{times[0], init.x0_mean, init.x0_second_moment};

  for (std::size_t k = 1; k < M; ++k) {
    int accepted = 0, failed = 0;
    MomentState pred;
    try {
      pred = predict(state, times[k], accepted, failed);
    } catch (const std::exception& e) {
      throw FilterError("prediction failed on (t_" + std::to_string(k - 1) + ", t_" +
                        std::to_string(k) + "]: " + e.what());
    }
    tr.accepted_steps[k] = accepted;
    tr.failed_steps[k] = failed;

    const Matrix v_pred = pred.P - pred.y * pred.y.transpose();
    const auto up = measurement_update(pred.y, v_pred, data.z[k], obs,
                                       static_cast<int>(k), jitter);
    tr.y_pred[k] = pred.y;
    tr.V_pred[k] = 0.5 * (v_pred + v_pred.transpose());
    tr.nu[k] = up.nu;
    tr.Sigma[k] = up.Sigma;
    tr.K[k] = up.K;
    tr.y_filt[k] = up.y;
    tr.P_filt[k] = up.P;
    state = MomentState{times[k], up.y, up.P};
  }
  return tr;
}

FilterTrace run_filter(const SdeModel& model, const ObservationModel& obs,
                       const ObservationSeries& data, const InitialCondition& init,
                       const Vector& theta, const FilterConfig& cfg) {
  cfg.validate();

  if (cfg.grid_mode == GridMode::Uniform) {
    Predictor predict = [&model, &cfg, &theta](const MomentState& from, double t_next,
                                               int& accepted, int&) {
      const double len = t_next - from.t;
      int nsteps = 1;
      if (std::isfinite(cfg.h) && cfg.h < len)
        nsteps = static_cast<int>(std::ceil(len / cfg.h - 1e-9));
      const double step = len / nsteps;
      MomentState s = from;
      for (int n = 1; n <= nsteps; ++n) {
        const double target = (n == nsteps) ? t_next : from.t + n * step;
        s = predict_step(model, cfg.beta, s, target, theta);
        ++accepted;
      }
      return s;
    };
    return run_filter_core(predict, obs, data, init, cfg.jitter);
  }

  // Adaptive: step doubling. One step of h against two of h/2; accept when
  // every component satisfies its mixed tolerance, keep the fine result, and
  // rescale h by safety·(tol/err)^{1/2}. The step size carries over from one
  // interval to the next.
  struct Controller {
    double h = 0.0;
  };
  auto controller = std::make_shared<Controller>();

  Predictor predict = [&model, &cfg, &theta, controller](const MomentState& from,
                                                         double t_next, int& accepted,
                                                         int& failed) {
    MomentState s = from;
    const double interval = t_next - from.t;
    if (controller->h <= 0.0)
      controller->h = cfg.h_init > 0.0 ? cfg.h_init : std::min(interval, cfg.h_max);
    while (s.t < t_next - 1e-14 * (1.0 + std::abs(t_next))) {
      const double hs = std::min({controller->h, t_next - s.t, cfg.h_max});
      const MomentState full = predict_step(model, cfg.beta, s, s.t + hs, theta);
      const MomentState half = predict_step(model, cfg.beta, s, s.t + 0.5 * hs, theta);
      const MomentState fine = predict_step(model, cfg.beta, half, s.t + hs, theta);

      double ratio = 0.0;
      for (int i = 0; i < model.d; ++i) {
        const double tol = cfg.atol_y + cfg.rtol_y * std::abs(fine.y[i]);
        ratio = std::max(ratio, std::abs(full.y[i] - fine.y[i]) / tol);
      }
      for (int i = 0; i < model.d; ++i)
        for (int j = 0; j < model.d; ++j) {
          const double tol = cfg.atol_P + cfg.rtol_P * std::abs(fine.P(i, j));
          ratio = std::max(ratio, std::abs(full.P(i, j) - fine.P(i, j)) / tol);
        }

      if (ratio <= 1.0) {
        s = fine;
        ++accepted;
      } else {
        ++failed;
        if (hs <= cfg.h_min * (1.0 + 1e-9))
          throw FilterError("adaptive step rejected at the minimum step size (t=" +
                            std::to_string(s.t) + ", err ratio=" + std::to_string(ratio) +
                            ")");
      }
      double factor = cfg.safety * std::sqrt(1.0 / std::max(ratio, 1e-16));
      factor = std::clamp(factor, 0.1, 5.0);
      controller->h = std::clamp(hs * factor, cfg.h_min, cfg.h_max);
    }
    return s;
  };
  return run_filter_core(predict, obs, data, init, cfg.jitter);
}

FilterTrace exact_lmv_filter(const std::string& id, const ObservationModel& obs,
                             const ObservationSeries& data, const InitialCondition& init,
                             const Vector& theta, double jitter) {
  Predictor predict = [&id, &theta](const MomentState& from, double t_next, int& accepted,
                                    int&) {
    const auto mom =
        exact_moment_oracle(id, theta, from.y[0], from.P(0, 0), from.t, t_next);
    ++accepted;
    MomentState s;
    s.t = t_next;
    s.y = Vector::Constant(1, mom.mean);
    s.P = Matrix::Constant(1, 1, mom.second_moment);
    return s;
  };
  return run_filter_core(predict, obs, data, init, jitter);
}

} // namespace sdefit
