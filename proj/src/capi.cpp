#include "sdefit/sdefit.h"

#include <cstring>
#include <limits>
#include <memory>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "experiment.hpp"
#include "registry.hpp"
#include "simulate.hpp"
#include "version.hpp"

using namespace sdefit;

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

template <typename Fn> int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ModelError& e) {
    set_error(e.what());
    return SDEFIT_ERR_UNKNOWN_MODEL;
  } catch (const ConfigError& e) {
    set_error(e.what());
    return SDEFIT_ERR_CONFIG;
  } catch (const NumericError& e) {
    set_error(e.what());
    return SDEFIT_ERR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return SDEFIT_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SDEFIT_ERR_RUNTIME;
  }
}

Vector to_vector(const double* data, size_t len) {
  Vector v(static_cast<Eigen::Index>(len));
  for (size_t i = 0; i < len; ++i)
    v[static_cast<Eigen::Index>(i)] = data[i];
  return v;
}

EstimatorConfig make_estimator_config(int mode, double h) {
  EstimatorConfig cfg;
  switch (mode) {
  case SDEFIT_MODE_EXACT:
    cfg.mode = EstimatorMode::Exact;
    break;
  case SDEFIT_MODE_CONVENTIONAL:
    cfg.mode = EstimatorMode::Conventional;
    break;
  case SDEFIT_MODE_UNIFORM:
    cfg.mode = EstimatorMode::Uniform;
    cfg.h = h;
    break;
  case SDEFIT_MODE_ADAPTIVE:
    cfg.mode = EstimatorMode::Adaptive;
    break;
  default:
    throw std::invalid_argument("unknown estimator mode code " + std::to_string(mode));
  }
  return cfg;
}

} // namespace

struct sdefit_model {
  TestModel tm;
  EstimationProblem problem;
};

struct sdefit_series {
  ObservationSeries series;
};

struct sdefit_experiment {
  // Exactly one of the two configurations is active.
  bool is_convergence = false;
  ExperimentConfig config;
  std::string conv_model;
  std::vector<double> conv_ladder;
  double conv_delta = 1.0, conv_horizon = 10.0, conv_fine_dt = 1e-3;
  std::uint64_t conv_seed = 0;
  ExperimentTables tables;
  bool ran = false;
};

extern "C" {

const char* sdefit_version(void) { return kVersion; }

const char* sdefit_last_error(void) { return t_last_error.c_str(); }

sdefit_model* sdefit_model_create(const char* id, const double* theta, size_t theta_len) {
  if (!id) {
    set_error("model id must not be NULL");
    return nullptr;
  }
  sdefit_model* out = nullptr;
  const int st = guarded([&] {
    Vector th;
    if (theta && theta_len > 0)
      th = to_vector(theta, theta_len);
    auto handle = std::make_unique<sdefit_model>();
    handle->tm = test_model(id, th);
    handle->problem.model = handle->tm.sde;
    handle->problem.obs = handle->tm.obs;
    handle->problem.init = handle->tm.init;
    handle->problem.exact_id = handle->tm.has_exact_moments ? handle->tm.id : "";
    out = handle.release();
    return SDEFIT_OK;
  });
  (void)st;
  return out;
}

void sdefit_model_free(sdefit_model* model) { delete model; }

int sdefit_model_state_dim(const sdefit_model* model) { return model ? model->tm.sde.d : -1; }

int sdefit_model_obs_dim(const sdefit_model* model) { return model ? model->tm.obs.r : -1; }

int sdefit_model_param_dim(const sdefit_model* model) {
  return model ? model->tm.sde.theta_dim : -1;
}

int sdefit_model_default_theta(const sdefit_model* model, double* out, size_t len) {
  if (!model || !out) {
    set_error("NULL argument");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  if (len < static_cast<size_t>(model->tm.sde.theta_dim)) {
    set_error("output buffer too small");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  for (int j = 0; j < model->tm.sde.theta_dim; ++j)
    out[j] = model->tm.theta0[j];
  return SDEFIT_OK;
}

int sdefit_model_theta_box(const sdefit_model* model, double* lo, double* hi, size_t len) {
  if (!model || !lo || !hi) {
    set_error("NULL argument");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  if (len < static_cast<size_t>(model->tm.sde.theta_dim)) {
    set_error("output buffer too small");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  for (int j = 0; j < model->tm.sde.theta_dim; ++j) {
    lo[j] = model->tm.sde.theta_lo[j];
    hi[j] = model->tm.sde.theta_hi[j];
  }
  return SDEFIT_OK;
}

int sdefit_model_param_name(const sdefit_model* model, int index, char* buf, size_t len) {
  if (!model || !buf || len == 0) {
    set_error("NULL argument or empty buffer");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  if (index < 0 || index >= model->tm.sde.theta_dim) {
    set_error("parameter index out of range");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  const std::string& name = model->tm.param_names[static_cast<std::size_t>(index)];
  std::strncpy(buf, name.c_str(), len - 1);
  buf[len - 1] = '\0';
  return SDEFIT_OK;
}

int sdefit_model_has_exact(const sdefit_model* model) {
  return model && model->tm.has_exact_moments ? 1 : 0;
}

sdefit_series* sdefit_simulate_series(const sdefit_model* model, double delta,
                                      double horizon, double fine_dt, int scheme,
                                      uint64_t seed, uint32_t replication) {
  if (!model) {
    set_error("NULL model");
    return nullptr;
  }
  sdefit_series* out = nullptr;
  guarded([&] {
    SimProtocol protocol;
    protocol.scheme = scheme == SDEFIT_SCHEME_LL ? SimScheme::LocalLinearization
                                                 : SimScheme::Euler;
    protocol.delta = delta;
    protocol.horizon = horizon;
    protocol.fine_dt = fine_dt;
    protocol.seed = seed;
    protocol.replications = 1;
    const Path path = simulate_path(model->tm.sde, model->tm.theta0,
                                    model->tm.init.x0_mean, model->tm.t0, protocol,
                                    replication);
    auto handle = std::make_unique<sdefit_series>();
    handle->series = make_observations(path, protocol, model->tm.obs, replication);
    out = handle.release();
    return SDEFIT_OK;
  });
  return out;
}

void sdefit_series_free(sdefit_series* series) { delete series; }

size_t sdefit_series_count(const sdefit_series* series) {
  return series ? series->series.z.size() : 0;
}

int sdefit_series_get(const sdefit_series* series, size_t k, double* t, double* z_out,
                      size_t z_len) {
  if (!series || !t || !z_out) {
    set_error("NULL argument");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  if (k >= series->series.z.size()) {
    set_error("observation index out of range");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  const auto& z = series->series.z[k];
  if (z_len < static_cast<size_t>(z.size())) {
    set_error("output buffer too small");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  *t = series->series.grid.obs_times[k];
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z_out[i] = z[i];
  return SDEFIT_OK;
}

int sdefit_innovation_nll(const sdefit_model* model, const sdefit_series* series,
                          const double* theta, size_t theta_len, int mode, double h,
                          double* nll_out) {
  if (!model || !series || !theta || !nll_out) {
    set_error("NULL argument");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto ev = innovation_nll(model->problem, series->series,
                                   to_vector(theta, theta_len),
                                   make_estimator_config(mode, h));
    *nll_out = ev.value;
    return SDEFIT_OK;
  });
}

int sdefit_estimate(const sdefit_model* model, const sdefit_series* series,
                    const double* theta_init, size_t theta_len, int mode, double h,
                    int max_evals, double* theta_out, double* nll_out, int* converged_out) {
  if (!model || !series || !theta_init || !theta_out) {
    set_error("NULL argument");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  if (theta_len != static_cast<size_t>(model->tm.sde.theta_dim)) {
    set_error("theta_init has the wrong length");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    OptimizerSettings opt;
    if (max_evals > 0)
      opt.max_evals = max_evals;
    const auto res = estimate(model->problem, series->series,
                              to_vector(theta_init, theta_len),
                              make_estimator_config(mode, h), opt);
    for (int j = 0; j < model->tm.sde.theta_dim; ++j)
      theta_out[j] = res.theta_hat[j];
    if (nll_out)
      *nll_out = res.nll;
    if (converged_out)
      *converged_out = res.converged ? 1 : 0;
    return SDEFIT_OK;
  });
}

sdefit_experiment* sdefit_experiment_create(const char* config_text) {
  if (!config_text) {
    set_error("NULL config text");
    return nullptr;
  }
  sdefit_experiment* out = nullptr;
  guarded([&] {
    auto handle = std::make_unique<sdefit_experiment>();
    handle->config = parse_config(config_text);
    out = handle.release();
    return SDEFIT_OK;
  });
  return out;
}

sdefit_experiment* sdefit_convergence_create(const char* model_id, const double* h_ladder,
                                             size_t h_count, double delta, double horizon,
                                             double fine_dt, uint64_t seed) {
  if (!model_id || (!h_ladder && h_count > 0)) {
    set_error("NULL argument");
    return nullptr;
  }
  sdefit_experiment* out = nullptr;
  guarded([&] {
    auto handle = std::make_unique<sdefit_experiment>();
    handle->is_convergence = true;
    handle->conv_model = model_id;
    handle->conv_ladder.assign(h_ladder, h_ladder + h_count);
    handle->conv_delta = delta;
    handle->conv_horizon = horizon;
    handle->conv_fine_dt = fine_dt;
    handle->conv_seed = seed;
    out = handle.release();
    return SDEFIT_OK;
  });
  return out;
}

void sdefit_experiment_free(sdefit_experiment* experiment) { delete experiment; }

int sdefit_experiment_run(sdefit_experiment* experiment, int threads) {
  if (!experiment) {
    set_error("NULL experiment");
    return SDEFIT_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    if (experiment->is_convergence) {
      experiment->tables = run_convergence_check(
          experiment->conv_model, experiment->conv_ladder, experiment->conv_delta,
          experiment->conv_horizon, experiment->conv_fine_dt, experiment->conv_seed,
          threads);
    } else {
      experiment->tables = run_experiment(experiment->config, threads);
    }
    experiment->ran = true;
    return SDEFIT_OK;
  });
}

int sdefit_experiment_table_count(const sdefit_experiment* experiment) {
  return experiment ? static_cast<int>(experiment->tables.tables.size()) : 0;
}

const char* sdefit_experiment_table_name(const sdefit_experiment* experiment, int index) {
  if (!experiment || index < 0 ||
      index >= static_cast<int>(experiment->tables.tables.size()))
    return nullptr;
  return experiment->tables.tables[static_cast<std::size_t>(index)].first.c_str();
}

const char* sdefit_experiment_table_text(const sdefit_experiment* experiment,
                                         const char* name) {
  if (!experiment || !name)
    return nullptr;
  const std::string* text = experiment->tables.find(name);
  return text ? text->c_str() : nullptr;
}

const char* sdefit_experiment_out_dir(const sdefit_experiment* experiment) {
  if (!experiment)
    return "";
  return experiment->config.out_dir.c_str();
}

} // extern "C"
