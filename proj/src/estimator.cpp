#include "estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "errors.hpp"
#include "linalg.hpp"

namespace sdefit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string mode_name(EstimatorMode mode) {
  switch (mode) {
  case EstimatorMode::Exact:
    return "exact";
  case EstimatorMode::Conventional:
    return "conventional";
  case EstimatorMode::Uniform:
    return "uniform";
  case EstimatorMode::Adaptive:
    return "adaptive";
  }
  return "?";
}

std::string ModeSpec::label() const {
  if (mode != EstimatorMode::Uniform)
    return mode_name(mode);
  char buf[48];
  std::snprintf(buf, sizeof buf, "uniform_%g", h);
  return buf;
}

FilterConfig EstimatorConfig::filter_config() const {
  FilterConfig fc = filter;
  switch (mode) {
  case EstimatorMode::Exact:
  case EstimatorMode::Conventional:
    fc.grid_mode = GridMode::Uniform;
    fc.h = kInf; // one linearization step per interval
    break;
  case EstimatorMode::Uniform:
    fc.grid_mode = GridMode::Uniform;
    fc.h = h;
    break;
  case EstimatorMode::Adaptive:
    fc.grid_mode = GridMode::Adaptive;
    break;
  }
  return fc;
}

namespace {

FilterTrace run_configured_filter(const EstimationProblem& problem,
                                  const ObservationSeries& data, const Vector& theta,
                                  const EstimatorConfig& cfg) {
  if (cfg.mode == EstimatorMode::Exact) {
    if (problem.exact_id.empty())
      throw EstimationError("exact mode requires a model with closed-form moments");
    return exact_lmv_filter(problem.exact_id, problem.obs, data, problem.init, theta,
                            cfg.filter.jitter);
  }
  return run_filter(problem.model, problem.obs, data, problem.init, theta,
                    cfg.filter_config());
}

} // namespace

NllEvaluation innovation_nll(const EstimationProblem& problem, const ObservationSeries& data,
                             const Vector& theta, const EstimatorConfig& cfg) {
  NllEvaluation ev;
  ev.theta = theta;

  FilterTrace tr;
  try {
    tr = run_configured_filter(problem, data, theta, cfg);
  } catch (const FilterError&) {
    ev.value = kInf;
    ev.ok = false;
    return ev;
  } catch (const NumericError&) {
    ev.value = kInf;
    ev.ok = false;
    return ev;
  }

  const std::size_t M = tr.observations();
  double total = (static_cast<double>(M) - 1.0) * std::log(2.0 * M_PI);
  ev.per_term.reserve(M > 0 ? M - 1 : 0);
  for (std::size_t k = 1; k < M; ++k) {
    Eigen::LLT<Matrix> llt(tr.Sigma[k]);
    if (llt.info() != Eigen::Success) {
      ev.value = kInf;
      ev.ok = false;
      return ev;
    }
    const Matrix l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i)
      logdet += 2.0 * std::log(l(i, i));
    const double quad = tr.nu[k].dot(llt.solve(tr.nu[k]));
    ev.per_term.emplace_back(logdet, quad);
    total += logdet + quad;
  }
  if (!std::isfinite(total)) {
    ev.value = kInf;
    ev.ok = false;
    return ev;
  }
  ev.value = total;
  ev.ok = true;
  return ev;
}

namespace {

Vector project_box(Vector x, const Vector& lo, const Vector& hi) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

} // namespace

SimplexResult minimize_simplex(const std::function<double(const Vector&)>& f,
                               const Vector& x0, const Vector& lo, const Vector& hi,
                               const OptimizerSettings& opt) {
  const Eigen::Index n = x0.size();
  // Normalize the box representation: bounds may arrive in either order.
  Vector blo = lo.cwiseMin(hi), bhi = lo.cwiseMax(hi);

  SimplexResult res;
  std::vector<Vector> x(n + 1);
  std::vector<double> fx(n + 1);

  auto eval = [&](const Vector& p) {
    ++res.evals;
    const double v = f(p);
    return std::isnan(v) ? kInf : v;
  };

  x[0] = project_box(x0, blo, bhi);
  fx[0] = eval(x[0]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector xi = x[0];
    double step = opt.init_step * (bhi[i] - blo[i]);
    if (step <= 0.0)
      step = std::max(1e-4, 1e-2 * std::abs(xi[i]));
    if (xi[i] + step > bhi[i])
      step = -step; // step inward when sitting at the upper bound
    xi[i] += step;
    x[static_cast<std::size_t>(i) + 1] = project_box(xi, blo, bhi);
    fx[static_cast<std::size_t>(i) + 1] = eval(x[static_cast<std::size_t>(i) + 1]);
  }
  if (std::all_of(fx.begin(), fx.end(), [](double v) { return v == kInf; }))
    throw EstimationError("all initial simplex vertices are infeasible");

  auto order = [&] {
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return fx[a] < fx[b];
    });
    std::vector<Vector> xs(x.size());
    std::vector<double> fs(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xs[i] = x[idx[i]];
      fs[i] = fx[idx[i]];
    }
    x.swap(xs);
    fx.swap(fs);
  };

  const std::size_t worst = static_cast<std::size_t>(n);
  while (res.evals < opt.max_evals) {
    order();

    double diameter = 0.0;
    for (std::size_t i = 1; i <= worst; ++i)
      diameter = std::max(diameter, (x[i] - x[0]).cwiseAbs().maxCoeff());
    const double spread = fx[worst] - fx[0];
    if (diameter <= opt.xtol && (spread <= opt.ftol || !std::isfinite(spread))) {
      res.converged = diameter <= opt.xtol && spread <= opt.ftol;
      break;
    }

    ++res.iterations;
    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i < worst; ++i)
      centroid += x[i];
    centroid /= static_cast<double>(n);

    const Vector xr = project_box(centroid + (centroid - x[worst]), blo, bhi);
    const double fr = eval(xr);
    if (fr < fx[0]) {
      const Vector xe = project_box(centroid + 2.0 * (centroid - x[worst]), blo, bhi);
      const double fe = eval(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
      continue;
    }
    if (fr < fx[worst - 1]) {
      x[worst] = xr;
      fx[worst] = fr;
      continue;
    }
    // Contract (outside when the reflection improved on the worst).
    const bool outside = fr < fx[worst];
    const Vector base = outside ? xr : x[worst];
    const Vector xc = project_box(centroid + 0.5 * (base - centroid), blo, bhi);
    const double fc = eval(xc);
    if (fc < std::min(fr, fx[worst])) {
      x[worst] = xc;
      fx[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 1; i <= worst; ++i) {
      x[i] = project_box(x[0] + 0.5 * (x[i] - x[0]), blo, bhi);
      fx[i] = eval(x[i]);
      if (res.evals >= opt.max_evals)
        break;
    }
  }

  order();
  res.x = x[0];
  res.f = fx[0];
  return res;
}

EstimationResult estimate(const EstimationProblem& problem, const ObservationSeries& data,
                          const Vector& theta_init, const EstimatorConfig& cfg,
                          const OptimizerSettings& opt) {
  const auto objective = [&](const Vector& th) {
    return innovation_nll(problem, data, th, cfg).value;
  };

  SimplexResult first = minimize_simplex(objective, theta_init, problem.model.theta_lo,
                                         problem.model.theta_hi, opt);
  // One restart from the incumbent with a reinitialized (tighter) simplex.
  OptimizerSettings restart = opt;
  restart.init_step = 0.25 * opt.init_step;
  SimplexResult second = minimize_simplex(objective, first.x, problem.model.theta_lo,
                                          problem.model.theta_hi, restart);
  const SimplexResult& best = second.f <= first.f ? second : first;

  EstimationResult out;
  out.theta_hat = best.x;
  out.nll = best.f;
  out.iterations = first.iterations + second.iterations;
  out.nll_evals = first.evals + second.evals;
  out.converged = second.converged && std::isfinite(best.f);
  out.mode = cfg.mode;
  out.h = cfg.h;

  const FilterTrace tr = run_configured_filter(problem, data, out.theta_hat, cfg);
  out.accepted_total = tr.total_accepted();
  out.failed_total = tr.total_failed();
  out.accepted_per_obs = tr.accepted_steps;
  out.failed_per_obs = tr.failed_steps;
  return out;
}

SuiteResult estimator_suite(const EstimationProblem& problem,
                            const std::vector<ObservationSeries>& batch,
                            const std::vector<ModeSpec>& modes, const Vector& theta0,
                            const Vector& theta_init, const EstimatorConfig& base_cfg,
                            const OptimizerSettings& opt, int threads) {
  for (const auto& spec : modes)
    if (spec.mode == EstimatorMode::Exact && problem.exact_id.empty())
      throw EstimationError("exact mode requested for a model without closed-form moments");

  SuiteResult suite;
  suite.modes = modes;
  suite.results.assign(modes.size(),
                       std::vector<std::optional<EstimationResult>>(batch.size()));

  struct Job {
    std::size_t mode;
    std::size_t rep;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < modes.size(); ++m)
    for (std::size_t r = 0; r < batch.size(); ++r)
      jobs.push_back({m, r});

  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size())
        return;
      const auto [m, r] = jobs[j];
      EstimatorConfig cfg = base_cfg;
      cfg.mode = modes[m].mode;
      cfg.h = modes[m].h;
      try {
        suite.results[m][r] = estimate(problem, batch[r], theta_init, cfg, opt);
      } catch (const std::exception& e) {
        errors[j] = modes[m].label() + " rep " + std::to_string(r) + ": " + e.what();
      }
    }
  };

  int n_threads = threads > 0 ? threads : 1;
  n_threads = std::min<int>(n_threads, static_cast<int>(jobs.size()) > 0
                                           ? static_cast<int>(jobs.size())
                                           : 1);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i)
      pool.emplace_back(worker);
    for (auto& th : pool)
      th.join();
  }
  for (auto& msg : errors)
    if (!msg.empty()) {
      suite.failure_messages.push_back(msg);
      ++suite.failures;
    }

  // Deterministic reduction: fixed mode and replication order.
  const int p = static_cast<int>(theta0.size());
  std::ptrdiff_t exact_index = -1;
  for (std::size_t m = 0; m < modes.size(); ++m)
    if (modes[m].mode == EstimatorMode::Exact)
      exact_index = static_cast<std::ptrdiff_t>(m);

  auto sample_std = [](const std::vector<double>& v, double mean) {
    if (v.size() < 2)
      return 0.0;
    double acc = 0.0;
    for (double x : v)
      acc += (x - mean) * (x - mean);
    return std::sqrt(acc / (static_cast<double>(v.size()) - 1.0));
  };

  std::vector<double> exact_means(static_cast<std::size_t>(p), 0.0);
  if (exact_index >= 0) {
    for (int j = 0; j < p; ++j) {
      std::vector<double> vals;
      for (const auto& r : suite.results[static_cast<std::size_t>(exact_index)])
        if (r)
          vals.push_back(r->theta_hat[j]);
      exact_means[static_cast<std::size_t>(j)] =
          vals.empty() ? 0.0
                       : std::accumulate(vals.begin(), vals.end(), 0.0) /
                             static_cast<double>(vals.size());
    }
  }

  for (std::size_t m = 0; m < modes.size(); ++m) {
    for (int j = 0; j < p; ++j) {
      SuiteSummaryRow row;
      row.mode = modes[m];
      row.param = j;
      std::vector<double> vals;
      std::vector<double> errs;
      for (std::size_t r = 0; r < batch.size(); ++r) {
        if (!suite.results[m][r])
          continue;
        vals.push_back(suite.results[m][r]->theta_hat[j]);
        if (exact_index >= 0 && suite.results[static_cast<std::size_t>(exact_index)][r])
          errs.push_back(std::abs(
              suite.results[static_cast<std::size_t>(exact_index)][r]->theta_hat[j] -
              suite.results[m][r]->theta_hat[j]));
      }
      row.n_ok = static_cast<int>(vals.size());
      if (!vals.empty()) {
        row.mean = std::accumulate(vals.begin(), vals.end(), 0.0) /
                   static_cast<double>(vals.size());
        row.stddev = sample_std(vals, row.mean);
        row.bias = row.mean - theta0[j];
      }
      if (exact_index >= 0 && !errs.empty()) {
        const double em = std::accumulate(errs.begin(), errs.end(), 0.0) /
                          static_cast<double>(errs.size());
        row.err_vs_exact_mean = em;
        row.err_vs_exact_std = sample_std(errs, em);
        row.diff_vs_exact = row.mean - exact_means[static_cast<std::size_t>(j)];
      }
      suite.summary.push_back(std::move(row));
    }
  }
  return suite;
}

} // namespace sdefit
