#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "sgnht/harness.hpp"
#include "sgnht/integrators.hpp"

namespace sgnht {

namespace pt = boost::property_tree;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::molecular:
      return "molecular";
    case ExperimentKind::gaussian_mean:
      return "gaussian-mean";
    case ExperimentKind::logistic:
      return "logistic";
    case ExperimentKind::harmonic:
      return "harmonic";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "molecular") return ExperimentKind::molecular;
  if (name == "gaussian-mean") return ExperimentKind::gaussian_mean;
  if (name == "logistic") return ExperimentKind::logistic;
  if (name == "harmonic") return ExperimentKind::harmonic;
  throw ConfigError("experiment.name: unknown experiment '" + name +
                    "' (expected molecular, gaussian-mean, logistic or harmonic)");
}

std::vector<double> StepsizeGrid::values() const {
  if (!explicit_values.empty()) return explicit_values;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(start * std::pow(growth, static_cast<double>(k)));
  return out;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.thermostat.beta = 1.0;
  c.thermostat.mu = 10.0;
  switch (kind) {
    case ExperimentKind::molecular:
      c.methods = {"PAD", "BADODAB"};
      c.thermostat.sigma_a = 3.0;
      c.stepsizes = {0.03, 1.1, 10, {}};
      c.sim_time = 5000.0;
      c.runs = 10;
      break;
    case ExperimentKind::harmonic:
      c.methods = {"BADODAB"};
      c.thermostat.sigma_a = 3.0;
      c.stepsizes = {0.05, 1.3, 6, {}};
      c.sim_time = 1000.0;
      c.runs = 10;
      break;
    case ExperimentKind::gaussian_mean:
      c.methods = {"SGLD", "mSGLD", "PAD", "BADODAB"};
      c.thermostat.sigma_a = 1.0;
      c.stepsizes = {0.001, 1.5, 10, {}};
      c.sim_time = 1000.0;
      c.runs = 10;
      break;
    case ExperimentKind::logistic:
      c.methods = {"SGLD", "mSGLD", "PAD", "BADODAB"};
      c.thermostat.sigma_a = 6.0;
      c.stepsizes = {0.001, 1.3, 12, {}};
      c.sim_time = 1000.0;
      c.runs = 100;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("experiment.methods: at least one method is required");
  for (const auto& m : methods) {
    try {
      (void)canonical_method(m);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("experiment.methods: ") + e.what());
    }
    if (canonical_method(m) == "adBD" && experiment != ExperimentKind::harmonic) {
      throw ConfigError("experiment.methods: adBD needs an analytic model (harmonic experiment)");
    }
  }
  try {
    thermostat.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what());
  }
  if (!(sim_time > 0.0) || !std::isfinite(sim_time)) throw ConfigError("experiment.sim_time must be > 0");
  if (runs == 0) throw ConfigError("experiment.runs must be >= 1");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw ConfigError("experiment.burn_in must lie in [0, 1)");
  }
  if (output.empty()) throw ConfigError("experiment.output must not be empty");

  if (stepsizes.explicit_values.empty()) {
    if (!(stepsizes.start > 0.0) || !std::isfinite(stepsizes.start)) throw ConfigError("stepsizes.start must be > 0");
    if (!(stepsizes.growth > 0.0) || !std::isfinite(stepsizes.growth)) {
      throw ConfigError("stepsizes.growth must be > 0");
    }
    if (stepsizes.count == 0) throw ConfigError("stepsizes.count must be >= 1");
  } else {
    for (double h : stepsizes.explicit_values) {
      if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("stepsizes.values entries must be > 0");
    }
  }

  switch (experiment) {
    case ExperimentKind::molecular: {
      const auto& m = molecular;
      if (m.pendulum.n_particles < 2) throw ConfigError("pendulum.n_particles must be >= 2");
      if (!(m.pendulum.density > 0.0)) throw ConfigError("pendulum.density must be > 0");
      if (!(m.pendulum.k_spring > 0.0)) throw ConfigError("pendulum.k_spring must be > 0");
      if (!(m.pendulum.r_cut > 0.0)) throw ConfigError("pendulum.r_cut must be > 0");
      if (m.metrics.empty()) throw ConfigError("pendulum.metrics: at least one metric is required");
      for (const auto& name : m.metrics) {
        if (name != "U" && name != "Tconf") throw ConfigError("pendulum.metrics: unknown metric '" + name + "'");
      }
      if (!m.reference_u) {
        if (!(m.reference_h > 0.0)) throw ConfigError("pendulum.reference_h must be > 0");
        if (m.reference_runs == 0) throw ConfigError("pendulum.reference_runs must be >= 1");
        if (!(m.reference_time >= 0.0)) throw ConfigError("pendulum.reference_time must be >= 0");
        if (m.reference_sigma_a && !(*m.reference_sigma_a >= 0.0)) {
          throw ConfigError("pendulum.reference_sigma_a must be >= 0");
        }
        if (m.reference_mu && !(*m.reference_mu > 0.0)) throw ConfigError("pendulum.reference_mu must be > 0");
        if (!is_second_order(canonical_method(m.reference_method))) {
          throw ConfigError("pendulum.reference_method must be a splitting scheme");
        }
      }
      if (!thermostat.mass.empty() && thermostat.mass.size() != 3 * m.pendulum.n_particles) {
        throw ConfigError("thermostat.mass must have 3 * n_particles entries");
      }
      break;
    }
    case ExperimentKind::harmonic:
      if (harmonic.dim == 0) throw ConfigError("harmonic.dim must be >= 1");
      if (!(harmonic.stiffness > 0.0)) throw ConfigError("harmonic.stiffness must be > 0");
      if (!(harmonic.sigma >= 0.0)) throw ConfigError("harmonic.sigma must be >= 0");
      if (!thermostat.mass.empty() && thermostat.mass.size() != harmonic.dim) {
        throw ConfigError("thermostat.mass must have harmonic.dim entries");
      }
      break;
    case ExperimentKind::gaussian_mean: {
      const auto& g = gaussian;
      if (g.data_file.empty() && g.n < 2) throw ConfigError("gaussian-mean.n must be >= 2");
      if (!(g.sigma_hat > 0.0)) throw ConfigError("gaussian-mean.sigma_hat must be > 0");
      if (g.minibatch == 0) throw ConfigError("gaussian-mean.minibatch must be >= 1");
      if (g.data_file.empty() && g.sampling == MinibatchSampling::without_replacement && g.minibatch > g.n) {
        throw ConfigError("gaussian-mean.minibatch exceeds n");
      }
      if (g.bins == 0) throw ConfigError("gaussian-mean.bins must be >= 1");
      if (!(g.range_sd > 0.0)) throw ConfigError("gaussian-mean.range_sd must be > 0");
      if (!thermostat.mass.empty() && thermostat.mass.size() != 1) {
        throw ConfigError("thermostat.mass must have one entry");
      }
      break;
    }
    case ExperimentKind::logistic: {
      const auto& l = logistic;
      if (l.data_file.empty() && l.n < 2) throw ConfigError("logistic.n must be >= 2");
      if (l.minibatch == 0) throw ConfigError("logistic.minibatch must be >= 1");
      if (l.data_file.empty() && l.sampling == MinibatchSampling::without_replacement && l.minibatch > l.n) {
        throw ConfigError("logistic.minibatch exceeds n");
      }
      if (l.truth && l.truth->size() != 3) throw ConfigError("logistic.truth must have 3 entries");
      if (!l.truth) {
        if (!(l.truth_h > 0.0)) throw ConfigError("logistic.truth_h must be > 0");
        if (l.truth_steps == 0) throw ConfigError("logistic.truth_steps must be >= 1");
        if (l.truth_runs == 0) throw ConfigError("logistic.truth_runs must be >= 1");
        if (!(l.truth_sigma_a >= 0.0)) throw ConfigError("logistic.truth_sigma_a must be >= 0");
      }
      if (!thermostat.mass.empty() && thermostat.mass.size() != 3) {
        throw ConfigError("thermostat.mass must have 3 entries");
      }
      break;
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

/// Typed access to one section; records which keys were consumed so the
/// caller can reject the rest.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) {
    if (!tree_) return false;
    const auto child = tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (child) used_.insert(key);
    return static_cast<bool>(child);
  }

  std::string raw(const std::string& key) {
    return trim(tree_->get_child(pt::ptree::path_type(key, '\0')).data());
  }

  void get(const std::string& key, std::string& out) {
    if (has(key)) out = raw(key);
  }

  void get(const std::string& key, double& out) {
    if (has(key)) out = to_double(key, raw(key));
  }

  void get(const std::string& key, std::optional<double>& out) {
    if (has(key)) out = to_double(key, raw(key));
  }

  void get(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const std::string text = raw(key);
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != text.size() || text.empty() || v < 0) fail(key, "expected a non-negative integer, got '" + text + "'");
    out = static_cast<std::size_t>(v);
  }

  void get(const std::string& key, std::uint64_t& out, int) {
    if (!has(key)) return;
    const std::string text = raw(key);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != text.size() || text.empty() || text[0] == '-') {
      fail(key, "expected a non-negative integer, got '" + text + "'");
    }
    out = v;
  }

  void get(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& item : split_list(raw(key))) out.push_back(to_double(key, item));
  }

  void get(const std::string& key, std::vector<std::string>& out) {
    if (has(key)) out = split_list(raw(key));
  }

  void get(const std::string& key, MinibatchSampling& out) {
    if (!has(key)) return;
    const std::string text = raw(key);
    if (text == "without-replacement") {
      out = MinibatchSampling::without_replacement;
    } else if (text == "with-replacement") {
      out = MinibatchSampling::with_replacement;
    } else {
      fail(key, "expected with-replacement or without-replacement, got '" + text + "'");
    }
  }

  void reject_unused() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!used_.count(key)) fail(key, "unknown key");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError(name_ + "." + key + ": " + why);
  }

  double to_double(const std::string& key, const std::string& text) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != text.size() || text.empty()) fail(key, "expected a number, got '" + text + "'");
    return v;
  }

  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

std::string sampling_name(MinibatchSampling s) {
  return s == MinibatchSampling::with_replacement ? "with-replacement" : "without-replacement";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  static const std::set<std::string> known = {"experiment", "thermostat", "stepsizes", "pendulum",
                                              "harmonic",   "gaussian-mean", "logistic"};
  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty()) throw ConfigError(name + ": key outside of any [section]");
    if (!known.count(name)) throw ConfigError(name + ": unknown section");
  }
  auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
    return Section(child ? &*child : nullptr, name);
  };

  Section exp = section("experiment");
  std::string kind_name = "molecular";
  exp.get("name", kind_name);
  ExperimentConfig c = default_config(parse_experiment_kind(kind_name));
  exp.get("methods", c.methods);
  exp.get("sim_time", c.sim_time);
  exp.get("runs", c.runs);
  exp.get("burn_in", c.burn_in_fraction);
  exp.get("seed", c.seed, 0);
  exp.get("output", c.output);
  exp.get("max_steps", c.max_steps);
  exp.reject_unused();

  Section th = section("thermostat");
  th.get("beta", c.thermostat.beta);
  th.get("sigma_a", c.thermostat.sigma_a);
  th.get("mu", c.thermostat.mu);
  th.get("mass", c.thermostat.mass);
  th.reject_unused();

  Section st = section("stepsizes");
  st.get("start", c.stepsizes.start);
  st.get("growth", c.stepsizes.growth);
  st.get("count", c.stepsizes.count);
  st.get("values", c.stepsizes.explicit_values);
  st.reject_unused();

  Section pe = section("pendulum");
  auto& m = c.molecular;
  pe.get("n_particles", m.pendulum.n_particles);
  pe.get("density", m.pendulum.density);
  pe.get("k_spring", m.pendulum.k_spring);
  pe.get("r_cut", m.pendulum.r_cut);
  pe.get("metrics", m.metrics);
  pe.get("reference_u", m.reference_u);
  pe.get("reference_method", m.reference_method);
  pe.get("reference_h", m.reference_h);
  pe.get("reference_runs", m.reference_runs);
  pe.get("reference_time", m.reference_time);
  pe.get("reference_sigma_a", m.reference_sigma_a);
  pe.get("reference_mu", m.reference_mu);
  pe.reject_unused();

  Section ha = section("harmonic");
  ha.get("dim", c.harmonic.dim);
  ha.get("stiffness", c.harmonic.stiffness);
  ha.get("sigma", c.harmonic.sigma);
  ha.reject_unused();

  Section ga = section("gaussian-mean");
  auto& g = c.gaussian;
  ga.get("n", g.n);
  ga.get("sigma_hat", g.sigma_hat);
  ga.get("minibatch", g.minibatch);
  ga.get("sampling", g.sampling);
  ga.get("data_file", g.data_file);
  ga.get("data_seed", g.data_seed, 0);
  ga.get("bins", g.bins);
  ga.get("range_sd", g.range_sd);
  ga.reject_unused();

  Section lo = section("logistic");
  auto& l = c.logistic;
  lo.get("n", l.n);
  lo.get("minibatch", l.minibatch);
  lo.get("sampling", l.sampling);
  lo.get("data_file", l.data_file);
  lo.get("data_seed", l.data_seed, 0);
  if (lo.has("truth")) {
    std::vector<double> truth;
    lo.get("truth", truth);
    l.truth = truth;
  }
  lo.get("truth_file", l.truth_file);
  lo.get("truth_h", l.truth_h);
  lo.get("truth_steps", l.truth_steps);
  lo.get("truth_runs", l.truth_runs);
  lo.get("truth_sigma_a", l.truth_sigma_a);
  lo.reject_unused();

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
  };
  o << "[experiment]\n"
    << "name = " << to_string(c.experiment) << "\n"
    << "methods = " << join(c.methods) << "\n"
    << "sim_time = " << fmt(c.sim_time) << "\n"
    << "runs = " << c.runs << "\n"
    << "burn_in = " << fmt(c.burn_in_fraction) << "\n"
    << "seed = " << c.seed << "\n"
    << "output = " << c.output << "\n"
    << "max_steps = " << c.max_steps << "\n\n";
  o << "[thermostat]\n"
    << "beta = " << fmt(c.thermostat.beta) << "\n"
    << "sigma_a = " << fmt(c.thermostat.sigma_a) << "\n"
    << "mu = " << fmt(c.thermostat.mu) << "\n";
  if (!c.thermostat.mass.empty()) o << "mass = " << fmt_list(c.thermostat.mass) << "\n";
  o << "\n[stepsizes]\n"
    << "start = " << fmt(c.stepsizes.start) << "\n"
    << "growth = " << fmt(c.stepsizes.growth) << "\n"
    << "count = " << c.stepsizes.count << "\n";
  if (!c.stepsizes.explicit_values.empty()) o << "values = " << fmt_list(c.stepsizes.explicit_values) << "\n";

  switch (c.experiment) {
    case ExperimentKind::molecular: {
      const auto& m = c.molecular;
      o << "\n[pendulum]\n"
        << "n_particles = " << m.pendulum.n_particles << "\n"
        << "density = " << fmt(m.pendulum.density) << "\n"
        << "k_spring = " << fmt(m.pendulum.k_spring) << "\n"
        << "r_cut = " << fmt(m.pendulum.r_cut) << "\n"
        << "metrics = " << join(m.metrics) << "\n";
      if (m.reference_u) o << "reference_u = " << fmt(*m.reference_u) << "\n";
      o << "reference_method = " << m.reference_method << "\n"
        << "reference_h = " << fmt(m.reference_h) << "\n"
        << "reference_runs = " << m.reference_runs << "\n"
        << "reference_time = " << fmt(m.reference_time) << "\n";
      if (m.reference_sigma_a) o << "reference_sigma_a = " << fmt(*m.reference_sigma_a) << "\n";
      if (m.reference_mu) o << "reference_mu = " << fmt(*m.reference_mu) << "\n";
      break;
    }
    case ExperimentKind::harmonic:
      o << "\n[harmonic]\n"
        << "dim = " << c.harmonic.dim << "\n"
        << "stiffness = " << fmt(c.harmonic.stiffness) << "\n"
        << "sigma = " << fmt(c.harmonic.sigma) << "\n";
      break;
    case ExperimentKind::gaussian_mean: {
      const auto& g = c.gaussian;
      o << "\n[gaussian-mean]\n"
        << "n = " << g.n << "\n"
        << "sigma_hat = " << fmt(g.sigma_hat) << "\n"
        << "minibatch = " << g.minibatch << "\n"
        << "sampling = " << sampling_name(g.sampling) << "\n";
      if (!g.data_file.empty()) o << "data_file = " << g.data_file << "\n";
      o << "data_seed = " << g.data_seed << "\n"
        << "bins = " << g.bins << "\n"
        << "range_sd = " << fmt(g.range_sd) << "\n";
      break;
    }
    case ExperimentKind::logistic: {
      const auto& l = c.logistic;
      o << "\n[logistic]\n"
        << "n = " << l.n << "\n"
        << "minibatch = " << l.minibatch << "\n"
        << "sampling = " << sampling_name(l.sampling) << "\n";
      if (!l.data_file.empty()) o << "data_file = " << l.data_file << "\n";
      o << "data_seed = " << l.data_seed << "\n";
      if (l.truth) o << "truth = " << fmt_list(*l.truth) << "\n";
      if (!l.truth_file.empty()) o << "truth_file = " << l.truth_file << "\n";
      o << "truth_h = " << fmt(l.truth_h) << "\n"
        << "truth_steps = " << l.truth_steps << "\n"
        << "truth_runs = " << l.truth_runs << "\n"
        << "truth_sigma_a = " << fmt(l.truth_sigma_a) << "\n";
      break;
    }
  }
  return o.str();
}

}  // namespace sgnht
