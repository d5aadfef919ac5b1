#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "errors.hpp"
#include "registry.hpp"
#include "version.hpp"

namespace sdefit {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty())
    return 0.0;
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

std::string histogram_csv(std::vector<double> values) {
  std::string out = "bin_left,bin_right,count,q05,q95\n";
  if (values.empty())
    return out;
  std::sort(values.begin(), values.end());
  const double q05 = quantile(values, 0.05);
  const double q95 = quantile(values, 0.95);
  const double q25 = quantile(values, 0.25);
  const double q75 = quantile(values, 0.75);
  const double lo = values.front(), hi = values.back();
  // Freedman-Diaconis width; degenerate samples collapse to one bin.
  double width = 2.0 * (q75 - q25) /
                 std::cbrt(static_cast<double>(values.size()));
  int bins = 1;
  if (width > 0.0 && hi > lo)
    bins = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  double left = lo, right = hi;
  if (!(hi > lo)) {
    left = lo - 0.5;
    right = hi + 0.5;
  }
  const double step = (right - left) / bins;
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto b = static_cast<long>((v - left) / step);
    b = std::clamp<long>(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  for (int b = 0; b < bins; ++b) {
    out += fmt(left + b * step) + "," + fmt(left + (b + 1) * step) + "," +
           std::to_string(counts[static_cast<std::size_t>(b)]) + "," + fmt(q05) + "," +
           fmt(q95) + "\n";
  }
  return out;
}

std::vector<ModeSpec> expand_modes(const ExperimentConfig& cfg) {
  std::vector<ModeSpec> modes;
  if (cfg.use_exact)
    modes.push_back({EstimatorMode::Exact, 0.0});
  if (cfg.use_conventional)
    modes.push_back({EstimatorMode::Conventional, cfg.delta});
  for (double h : cfg.uniform_h)
    modes.push_back({EstimatorMode::Uniform, h});
  if (cfg.use_adaptive)
    modes.push_back({EstimatorMode::Adaptive, 0.0});
  if (modes.empty())
    throw ConfigError("no estimator modes selected");
  return modes;
}

struct Prepared {
  TestModel tm;
  EstimationProblem problem;
  SimProtocol protocol;
  Vector theta0;
  Vector theta_init;
  EstimatorConfig base_cfg;
};

Prepared prepare(const ExperimentConfig& cfg) {
  Prepared p;
  Vector theta0;
  if (!cfg.theta0.empty()) {
    theta0 = Eigen::Map<const Vector>(cfg.theta0.data(),
                                      static_cast<Eigen::Index>(cfg.theta0.size()));
  }
  try {
    p.tm = test_model(cfg.model_id, theta0);
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.pi_override >= 0.0) {
    const Matrix pi =
        cfg.pi_override * Matrix::Identity(p.tm.obs.r, p.tm.obs.r);
    p.tm.obs = constant_observation(p.tm.obs.C, pi);
  }

  p.problem.model = p.tm.sde;
  p.problem.obs = p.tm.obs;
  p.problem.init = p.tm.init;
  p.problem.exact_id = p.tm.has_exact_moments ? p.tm.id : "";

  p.protocol.scheme = (cfg.scheme < 0 ? p.tm.default_scheme : cfg.scheme) == 0
                          ? SimScheme::Euler
                          : SimScheme::LocalLinearization;
  p.protocol.fine_dt = cfg.fine_dt;
  p.protocol.horizon = cfg.horizon;
  p.protocol.delta = cfg.delta;
  p.protocol.replications = cfg.replications;
  p.protocol.seed = cfg.seed;
  p.protocol.validate();

  p.theta0 = p.tm.theta0;
  p.theta_init = p.theta0 * (1.0 + cfg.init_scale);
  for (int j = 0; j < p.tm.sde.theta_dim; ++j)
    p.theta_init[j] =
        std::clamp(p.theta_init[j], p.tm.sde.theta_lo[j], p.tm.sde.theta_hi[j]);

  p.base_cfg.filter.beta = 1;
  p.base_cfg.filter.rtol_y = cfg.rtol;
  p.base_cfg.filter.rtol_P = cfg.rtol;
  p.base_cfg.filter.atol_y = cfg.atol_y;
  p.base_cfg.filter.atol_P = cfg.atol_p;
  return p;
}

std::vector<ObservationSeries> simulate_batch(const Prepared& p, int threads) {
  std::vector<ObservationSeries> batch(
      static_cast<std::size_t>(p.protocol.replications));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= p.protocol.replications)
        return;
      const Path path = simulate_path(p.tm.sde, p.theta0, p.tm.init.x0_mean, p.tm.t0,
                                      p.protocol, static_cast<std::uint32_t>(r));
      batch[static_cast<std::size_t>(r)] = make_observations(
          path, p.protocol, p.tm.obs, static_cast<std::uint32_t>(r));
    }
  };
  const int n = std::max(1, std::min(threads, p.protocol.replications));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i)
      pool.emplace_back(worker);
    for (auto& t : pool)
      t.join();
  }
  return batch;
}

} // namespace

const std::string* ExperimentTables::find(const std::string& name) const {
  for (const auto& [n, text] : tables)
    if (n == name)
      return &text;
  return nullptr;
}

ExperimentTables run_experiment(const ExperimentConfig& cfg, int threads) {
  const Prepared p = prepare(cfg);
  const auto modes = expand_modes(cfg);
  if (cfg.use_exact && p.problem.exact_id.empty())
    throw ConfigError("exact mode is only available for ex1 and ex2");

  const auto batch = simulate_batch(p, threads);
  const auto suite = estimator_suite(p.problem, batch, modes, p.theta0, p.theta_init,
                                     p.base_cfg, cfg.opt, threads);

  const int np = p.tm.sde.theta_dim;
  ExperimentTables out;

  // estimates.csv
  {
    std::string csv = "replication,mode,h";
    for (int j = 0; j < np; ++j)
      csv += "," + p.tm.param_names[static_cast<std::size_t>(j)];
    csv += ",nll,converged,nll_evals,accepted_steps,failed_steps\n";
    for (std::size_t m = 0; m < modes.size(); ++m) {
      for (std::size_t r = 0; r < batch.size(); ++r) {
        const auto& res = suite.results[m][r];
        if (!res)
          continue;
        csv += std::to_string(r) + "," + mode_name(modes[m].mode) + "," +
               fmt(modes[m].h);
        for (int j = 0; j < np; ++j)
          csv += "," + fmt(res->theta_hat[j]);
        csv += "," + fmt(res->nll) + "," + std::to_string(res->converged ? 1 : 0) + "," +
               std::to_string(res->nll_evals) + "," + std::to_string(res->accepted_total) +
               "," + std::to_string(res->failed_total) + "\n";
      }
    }
    out.tables.emplace_back("estimates.csv", std::move(csv));
  }

  // summary.csv
  {
    std::string csv =
        "mode,h,param,n,mean,std,bias,err_vs_exact_mean,err_vs_exact_std,diff_vs_exact\n";
    for (const auto& row : suite.summary) {
      csv += mode_name(row.mode.mode) + "," + fmt(row.mode.h) + "," +
             p.tm.param_names[static_cast<std::size_t>(row.param)] + "," +
             std::to_string(row.n_ok) + "," + fmt(row.mean) + "," + fmt(row.stddev) + "," +
             fmt(row.bias) + ",";
      csv += row.err_vs_exact_mean ? fmt(*row.err_vs_exact_mean) : "";
      csv += ",";
      csv += row.err_vs_exact_std ? fmt(*row.err_vs_exact_std) : "";
      csv += ",";
      csv += row.diff_vs_exact ? fmt(*row.diff_vs_exact) : "";
      csv += "\n";
    }
    out.tables.emplace_back("summary.csv", std::move(csv));
  }

  // histogram_<param>_<mode>.csv
  for (int j = 0; j < np; ++j) {
    for (std::size_t m = 0; m < modes.size(); ++m) {
      std::vector<double> values;
      for (const auto& res : suite.results[m])
        if (res)
          values.push_back(res->theta_hat[j]);
      out.tables.emplace_back("histogram_" + p.tm.param_names[static_cast<std::size_t>(j)] +
                                  "_" + modes[m].label() + ".csv",
                              histogram_csv(std::move(values)));
    }
  }

  // steps.csv: per-observation averages over successful replications.
  {
    std::string csv = "mode,h,k,t_k,accepted_mean,failed_mean\n";
    const int m_obs = p.protocol.observation_count();
    for (std::size_t m = 0; m < modes.size(); ++m) {
      for (int k = 1; k < m_obs; ++k) {
        double acc = 0.0, fail = 0.0;
        int n = 0;
        for (const auto& res : suite.results[m]) {
          if (!res || k >= static_cast<int>(res->accepted_per_obs.size()))
            continue;
          acc += res->accepted_per_obs[static_cast<std::size_t>(k)];
          fail += res->failed_per_obs[static_cast<std::size_t>(k)];
          ++n;
        }
        if (n > 0) {
          acc /= n;
          fail /= n;
        }
        csv += mode_name(modes[m].mode) + "," + fmt(modes[m].h) + "," + std::to_string(k) +
               "," + fmt(p.tm.t0 + k * cfg.delta) + "," + fmt(acc) + "," + fmt(fail) + "\n";
      }
    }
    out.tables.emplace_back("steps.csv", std::move(csv));
  }

  // manifest.txt
  {
    std::string man = "# sdefit " + std::string(kVersion) + " manifest\n";
    man += "# model " + cfg.model_id + ", theta0 =";
    for (int j = 0; j < np; ++j)
      man += " " + fmt(p.theta0[j]);
    man += ", theta_init =";
    for (int j = 0; j < np; ++j)
      man += " " + fmt(p.theta_init[j]);
    man += "\n# histogram binning: Freedman-Diaconis\n";
    man += "# estimator failures: " + std::to_string(suite.failures) + "\n";
    for (const auto& msg : suite.failure_messages)
      man += "#   " + msg + "\n";
    man += "\n" + canonical_config(cfg);
    out.tables.emplace_back("manifest.txt", std::move(man));
  }

  return out;
}

ExperimentTables run_convergence_check(const std::string& model_id,
                                       const std::vector<double>& h_ladder, double delta,
                                       double horizon, double fine_dt, std::uint64_t seed,
                                       int threads) {
  if (model_id != "ex1" && model_id != "ex2")
    throw ConfigError("convergence check requires a model with closed-form moments "
                      "(ex1 or ex2)");
  if (h_ladder.empty())
    throw ConfigError("convergence check needs a non-empty h ladder");

  ExperimentConfig cfg;
  cfg.model_id = model_id;
  cfg.seed = seed;
  cfg.replications = 1;
  cfg.delta = delta;
  cfg.horizon = horizon;
  cfg.fine_dt = fine_dt;
  cfg.use_exact = true;
  cfg.use_conventional = false;
  cfg.uniform_h = h_ladder;
  for (double h : cfg.uniform_h) {
    if (!(h > 0.0) || h > delta * (1.0 + 1e-12))
      throw ConfigError("h ladder entries must lie in (0, delta]");
  }

  const Prepared p = prepare(cfg);
  const auto batch = simulate_batch(p, 1);
  std::vector<ModeSpec> modes = expand_modes(cfg);
  const auto suite = estimator_suite(p.problem, batch, modes, p.theta0, p.theta_init,
                                     p.base_cfg, cfg.opt, threads);

  const int np = p.tm.sde.theta_dim;
  ExperimentTables out;
  std::string csv = "h,param,abs_error\n";
  // modes[0] is exact; the rest mirror the ladder order.
  std::vector<std::vector<double>> errs(static_cast<std::size_t>(np));
  std::vector<std::vector<double>> hs(static_cast<std::size_t>(np));
  for (std::size_t m = 1; m < modes.size(); ++m) {
    for (int j = 0; j < np; ++j) {
      if (!suite.results[m][0] || !suite.results[0][0])
        continue;
      const double err =
          std::abs(suite.results[0][0]->theta_hat[j] - suite.results[m][0]->theta_hat[j]);
      csv += fmt(modes[m].h) + "," + p.tm.param_names[static_cast<std::size_t>(j)] + "," +
             fmt(err) + "\n";
      if (err > 0.0) {
        errs[static_cast<std::size_t>(j)].push_back(std::log(err));
        hs[static_cast<std::size_t>(j)].push_back(std::log(modes[m].h));
      }
    }
  }
  out.tables.emplace_back("convergence.csv", std::move(csv));

  std::string slopes = "param,slope,points\n";
  if (h_ladder.size() >= 2) {
    for (int j = 0; j < np; ++j) {
      const auto& x = hs[static_cast<std::size_t>(j)];
      const auto& y = errs[static_cast<std::size_t>(j)];
      if (x.size() < 2)
        continue;
      const double n = static_cast<double>(x.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      slopes += p.tm.param_names[static_cast<std::size_t>(j)] + "," + fmt(slope) + "," +
                std::to_string(x.size()) + "\n";
    }
  }
  out.tables.emplace_back("slopes.csv", std::move(slopes));

  std::string man = "# sdefit " + std::string(kVersion) + " convergence manifest\n";
  man += "# model = " + model_id + "\n# delta = " + fmt(delta) +
         "\n# horizon = " + fmt(horizon) + "\n# fine_dt = " + fmt(fine_dt) +
         "\n# seed = " + std::to_string(seed) + "\n# h_ladder =";
  for (double h : h_ladder)
    man += " " + fmt(h);
  man += "\n";
  out.tables.emplace_back("manifest.txt", std::move(man));
  return out;
}

} // namespace sdefit
