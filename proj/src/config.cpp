#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "errors.hpp"
#include "registry.hpp"

namespace sdefit {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty())
      items.push_back(item);
  }
  return items;
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size())
      throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
}

long parse_long(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size())
      throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + v + "'", line);
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool modes_given = false;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos)
      raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty())
      continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (section != "experiment" && section != "protocol" && section != "theta" &&
          section != "estimators" && section != "optimizer")
        throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("expected key = value", line);
    if (section.empty())
      throw ConfigError("key outside any section", line);

    if (section == "experiment") {
      if (key == "model")
        cfg.model_id = value;
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_long(value, line));
      else if (key == "replications")
        cfg.replications = static_cast<int>(parse_long(value, line));
      else if (key == "out")
        cfg.out_dir = value;
      else
        throw ConfigError("unknown key '" + key + "' in [experiment]", line);
    } else if (section == "protocol") {
      if (key == "delta")
        cfg.delta = parse_double(value, line);
      else if (key == "horizon")
        cfg.horizon = parse_double(value, line);
      else if (key == "fine_dt")
        cfg.fine_dt = parse_double(value, line);
      else if (key == "scheme") {
        if (value == "euler")
          cfg.scheme = 0;
        else if (value == "ll")
          cfg.scheme = 1;
        else if (value == "registry")
          cfg.scheme = -1;
        else
          throw ConfigError("scheme must be euler, ll or registry", line);
      } else if (key == "pi")
        cfg.pi_override = parse_double(value, line);
      else
        throw ConfigError("unknown key '" + key + "' in [protocol]", line);
    } else if (section == "theta") {
      if (key == "theta0") {
        cfg.theta0.clear();
        for (const auto& item : split_list(value))
          cfg.theta0.push_back(parse_double(item, line));
      } else if (key == "init_scale")
        cfg.init_scale = parse_double(value, line);
      else
        throw ConfigError("unknown key '" + key + "' in [theta]", line);
    } else if (section == "estimators") {
      if (key == "modes") {
        modes_given = true;
        cfg.use_exact = cfg.use_conventional = cfg.use_adaptive = false;
        bool any_uniform = false;
        for (const auto& item : split_list(value)) {
          if (item == "exact")
            cfg.use_exact = true;
          else if (item == "conventional")
            cfg.use_conventional = true;
          else if (item == "uniform")
            any_uniform = true;
          else if (item == "adaptive")
            cfg.use_adaptive = true;
          else
            throw ConfigError("unknown estimator mode '" + item + "'", line);
        }
        if (!any_uniform)
          cfg.uniform_h.clear();
      } else if (key == "h") {
        cfg.uniform_h.clear();
        for (const auto& item : split_list(value))
          cfg.uniform_h.push_back(parse_double(item, line));
      } else if (key == "rtol")
        cfg.rtol = parse_double(value, line);
      else if (key == "atol_y")
        cfg.atol_y = parse_double(value, line);
      else if (key == "atol_p")
        cfg.atol_p = parse_double(value, line);
      else
        throw ConfigError("unknown key '" + key + "' in [estimators]", line);
    } else if (section == "optimizer") {
      if (key == "max_evals")
        cfg.opt.max_evals = static_cast<int>(parse_long(value, line));
      else if (key == "xtol")
        cfg.opt.xtol = parse_double(value, line);
      else if (key == "ftol")
        cfg.opt.ftol = parse_double(value, line);
      else if (key == "init_step")
        cfg.opt.init_step = parse_double(value, line);
      else
        throw ConfigError("unknown key '" + key + "' in [optimizer]", line);
    }
  }
  (void)modes_given;

  // Semantic checks.
  if (cfg.model_id.empty())
    throw ConfigError("missing required key: [experiment] model");
  const auto ids = registry_ids();
  if (std::find(ids.begin(), ids.end(), cfg.model_id) == ids.end())
    throw ConfigError("unknown model id '" + cfg.model_id + "'");
  if (cfg.replications < 1)
    throw ConfigError("replications must be >= 1");
  if (!(cfg.delta > 0.0) || !(cfg.horizon > 0.0))
    throw ConfigError("delta and horizon must be positive");
  if (!(cfg.fine_dt > 0.0) || cfg.fine_dt > cfg.delta)
    throw ConfigError("need 0 < fine_dt <= delta");
  if (cfg.use_exact && cfg.model_id != "ex1" && cfg.model_id != "ex2")
    throw ConfigError("exact mode is only available for ex1 and ex2");
  for (double h : cfg.uniform_h) {
    if (!(h > 0.0) || h > cfg.delta * (1.0 + 1e-12))
      throw ConfigError("uniform h must lie in (0, delta]");
    const double ratio = cfg.delta / h;
    if (std::abs(ratio - std::lround(ratio)) > 1e-6 * std::max(1.0, ratio))
      throw ConfigError("uniform h must divide delta (or equal it): h=" + fmt(h));
  }
  if (!(cfg.rtol > 0.0 && cfg.atol_y > 0.0 && cfg.atol_p > 0.0))
    throw ConfigError("adaptive tolerances must be positive");
  if (cfg.opt.max_evals < 10)
    throw ConfigError("optimizer max_evals must be >= 10");
  if (!cfg.theta0.empty()) {
    const auto tm = test_model(cfg.model_id);
    if (static_cast<int>(cfg.theta0.size()) != tm.sde.theta_dim)
      throw ConfigError("theta0 must have " + std::to_string(tm.sde.theta_dim) +
                        " components for " + cfg.model_id);
  }
  return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string out;
  out += "[experiment]\n";
  out += "model = " + cfg.model_id + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "replications = " + std::to_string(cfg.replications) + "\n";
  if (!cfg.out_dir.empty())
    out += "out = " + cfg.out_dir + "\n";
  out += "\n[protocol]\n";
  out += "delta = " + fmt(cfg.delta) + "\n";
  out += "horizon = " + fmt(cfg.horizon) + "\n";
  out += "fine_dt = " + fmt(cfg.fine_dt) + "\n";
  out += std::string("scheme = ") +
         (cfg.scheme < 0 ? "registry" : (cfg.scheme == 0 ? "euler" : "ll")) + "\n";
  if (cfg.pi_override >= 0.0)
    out += "pi = " + fmt(cfg.pi_override) + "\n";
  out += "\n[theta]\n";
  if (!cfg.theta0.empty()) {
    out += "theta0 = ";
    for (std::size_t i = 0; i < cfg.theta0.size(); ++i)
      out += (i ? ", " : "") + fmt(cfg.theta0[i]);
    out += "\n";
  }
  out += "init_scale = " + fmt(cfg.init_scale) + "\n";
  out += "\n[estimators]\n";
  out += "modes = ";
  std::vector<std::string> modes;
  if (cfg.use_exact)
    modes.push_back("exact");
  if (cfg.use_conventional)
    modes.push_back("conventional");
  if (!cfg.uniform_h.empty())
    modes.push_back("uniform");
  if (cfg.use_adaptive)
    modes.push_back("adaptive");
  for (std::size_t i = 0; i < modes.size(); ++i)
    out += (i ? ", " : "") + modes[i];
  out += "\n";
  if (!cfg.uniform_h.empty()) {
    out += "h = ";
    for (std::size_t i = 0; i < cfg.uniform_h.size(); ++i)
      out += (i ? ", " : "") + fmt(cfg.uniform_h[i]);
    out += "\n";
  }
  out += "rtol = " + fmt(cfg.rtol) + "\n";
  out += "atol_y = " + fmt(cfg.atol_y) + "\n";
  out += "atol_p = " + fmt(cfg.atol_p) + "\n";
  out += "\n[optimizer]\n";
  out += "max_evals = " + std::to_string(cfg.opt.max_evals) + "\n";
  out += "xtol = " + fmt(cfg.opt.xtol) + "\n";
  out += "ftol = " + fmt(cfg.opt.ftol) + "\n";
  out += "init_step = " + fmt(cfg.opt.init_step) + "\n";
  return out;
}

} // namespace sdefit
