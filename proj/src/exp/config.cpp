#include "edagger/exp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "edagger/common/errors.hpp"
#include "edagger/common/hash.hpp"

namespace edagger::exp {

using nlohmann::json;

namespace {

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

json interval_json(const pendulum::Interval& r) { return json::array({r.lo, r.hi}); }

std::string_view threshold_kind_name(analysis::ThresholdKind k) {
  return k == analysis::ThresholdKind::Doubt ? "doubt" : "discrepancy";
}

std::string_view loss_name(nn::LossKind k) { return k == nn::LossKind::Mse ? "mse" : "gaussian_nll"; }

json rule_json(const NamedRule& r) {
  json j{{"name", r.name}, {"kind", dagger::kind_name(r.rule)}};
  std::visit(Overloaded{
                 [&](const dagger::VanillaRule& v) {
                   j["beta0"] = v.beta0;
                   j["lambda"] = v.lambda;
                 },
                 [&](const dagger::DiscrepancyRule& v) { j["tau"] = v.tau; },
                 [&](const dagger::DoubtRule& v) { j["chi"] = v.chi; },
                 [&](const dagger::EnsembleRule& v) {
                   j["tau"] = v.tau;
                   j["chi"] = v.chi;
                 },
             },
             r.rule);
  return j;
}

json to_json(const ExperimentConfig& c) {
  const pendulum::PendulumParams& p = c.pendulum.env.expert.params;
  const GpCompareSettings& g = c.gp_compare;
  json rules = json::array();
  for (const NamedRule& r : c.rules) rules.push_back(rule_json(r));
  json budget_rules = json::array();
  for (auto k : c.budget.rules) budget_rules.push_back(threshold_kind_name(k));
  return json{
      {"experiment", to_string(c.kind)},
      {"seeds", {{"master", c.master_seed}, {"per_epoch_ic", c.per_epoch_ic}}},
      {"repetitions", c.repetitions},
      {"jobs", c.jobs},
      {"kernel_backend", c.kernel_backend},
      {"output_dir", c.output_dir.string()},
      {"grid",
       {{"theta", interval_json(c.pendulum.grid.theta)},
        {"theta_dot", interval_json(c.pendulum.grid.theta_dot)},
        {"resolution", json::array({c.pendulum.grid.n_theta, c.pendulum.grid.n_theta_dot})}}},
      {"pendulum",
       {{"a", p.a},
        {"b", p.b},
        {"c", p.c},
        {"u_min", p.u_min},
        {"u_max", p.u_max},
        {"dt", p.dt},
        {"max_steps", p.max_steps},
        {"basin_max_steps", p.basin_max_steps},
        {"convergence_radius", p.convergence_radius},
        {"gains", json::array({c.pendulum.env.expert.gains[0], c.pendulum.env.expert.gains[1]})},
        {"ic_theta", interval_json(c.pendulum.env.ic_theta)},
        {"ic_theta_dot", interval_json(c.pendulum.env.ic_theta_dot)},
        {"stop_on_convergence", c.pendulum.env.stop_on_convergence}}},
      {"ensemble",
       {{"members", c.pendulum.ensemble.members},
        {"hidden", c.pendulum.ensemble.hidden},
        {"activation", nn::to_string(c.pendulum.ensemble.activation)},
        {"head", nn::to_string(c.pendulum.ensemble.head)}}},
      {"train",
       {{"epochs", c.pendulum.train.epochs},
        {"batch_size", c.pendulum.train.batch_size},
        {"learning_rate", c.pendulum.train.learning_rate},
        {"l2_coeff", c.pendulum.train.l2_coeff},
        {"loss", loss_name(c.pendulum.train.loss)},
        {"dropout_keep_prob", c.pendulum.train.dropout_keep_prob}}},
      {"dagger",
       {{"epochs", c.pendulum.dagger_epochs},
        {"trajectories_per_epoch", c.pendulum.trajectories_per_epoch},
        {"warm_start", c.pendulum.warm_start}}},
      {"analysis",
       {{"basin_cache_dir", c.pendulum.basin_cache_dir.string()}, {"full_novice_basin", c.pendulum.full_novice_basin},
        {"basin_precision", c.pendulum.basin_precision == analysis::Precision::Single ? "float32" : "float64"}}},
      {"rules", rules},
      {"budget",
       {{"rules", budget_rules},
        {"v0", c.budget.v0},
        {"dv", c.budget.dv},
        {"tolerance", c.budget.bisection.tolerance},
        {"max_iter", c.budget.bisection.max_iter},
        {"novice_basin_repetitions", c.budget.novice_basin_repetitions}}},
      {"gp_compare",
       {{"train_points", g.train_points},
        {"train_range", interval_json(g.train_range)},
        {"query_range", interval_json(g.query_range)},
        {"query_points", g.query_points},
        {"far_range", interval_json(g.far_range)},
        {"gp",
         {{"length_scale", g.gp_init.length_scale},
          {"signal_variance", g.gp_init.signal_variance},
          {"noise_variance", g.gp_init.noise_variance},
          {"restarts", g.gp_fit.restarts},
          {"optimize_length_scale", g.gp_fit.optimize_length_scale},
          {"optimize_signal_variance", g.gp_fit.optimize_signal_variance},
          {"optimize_noise_variance", g.gp_fit.optimize_noise_variance},
          {"steps", g.gp_fit.steps},
          {"learning_rate", g.gp_fit.learning_rate}}},
        {"hidden", g.hidden},
        {"activation", nn::to_string(g.activation)},
        {"members", g.members},
        {"batch_size", g.batch_size},
        {"vanilla", {{"epochs", g.vanilla_epochs}, {"learning_rate", g.vanilla_learning_rate}}},
        {"nll", {{"epochs", g.nll_epochs}, {"learning_rate", g.nll_learning_rate}}},
        {"mc_dropout",
         {{"epochs", g.mc_epochs},
          {"learning_rate", g.mc_learning_rate},
          {"keep_prob", g.mc_keep_prob},
          {"samples", g.mc_samples}}}}},
  };
}

bool same_category(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Overlays `user` on `base`, rejecting keys that `base` does not have.
void merge_strict(json& base, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), path);
    } else {
      if (!same_category(slot, it.value())) throw ConfigError("config key '" + path + "' has the wrong type");
      slot = it.value();
    }
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError("'" + what + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("'" + what + "' must be finite");
  return v;
}

std::size_t count(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError("'" + what + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

std::uint64_t seed_value(const json& j, const std::string& what) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
    throw ConfigError("'" + what + "' must be a non-negative integer");
  return j.get<std::uint64_t>();
}

pendulum::Interval interval(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("'" + what + "' must be [lo, hi]");
  return {number(j[0], what), number(j[1], what)};
}

std::vector<std::size_t> widths(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError("'" + what + "' must be an array of integers");
  std::vector<std::size_t> out;
  for (const json& v : j) out.push_back(count(v, what));
  return out;
}

std::string text(const json& j, const std::string& what) {
  if (!j.is_string()) throw ConfigError("'" + what + "' must be a string");
  return j.get<std::string>();
}

template <class F>
auto parse_enum(F&& f, const json& j, const std::string& what) {
  const std::string name = text(j, what);
  try {
    return f(name);
  } catch (const std::invalid_argument&) {
    throw ConfigError("'" + what + "' has unknown value '" + name + "'");
  }
}

NamedRule parse_rule(const json& j) {
  if (!j.is_object()) throw ConfigError("each rule must be an object");
  const std::string kind = text(j.value("kind", json()), "rules[].kind");
  std::vector<std::string> allowed = {"name", "kind"};
  NamedRule r;
  if (kind == "vanilla") {
    r.rule = dagger::VanillaRule{number(j.value("beta0", json(1.0)), "beta0"),
                                 number(j.value("lambda", json(0.5)), "lambda")};
    allowed.insert(allowed.end(), {"beta0", "lambda"});
  } else if (kind == "discrepancy") {
    r.rule = dagger::DiscrepancyRule{number(j.value("tau", json()), "tau")};
    allowed.push_back("tau");
  } else if (kind == "doubt") {
    r.rule = dagger::DoubtRule{number(j.value("chi", json()), "chi")};
    allowed.push_back("chi");
  } else if (kind == "ensemble") {
    r.rule = dagger::EnsembleRule{number(j.value("tau", json()), "tau"), number(j.value("chi", json()), "chi")};
    allowed.insert(allowed.end(), {"tau", "chi"});
  } else {
    throw ConfigError("unknown rule kind '" + kind + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key '" + it.key() + "' in " + kind + " rule");
  }
  r.name = j.contains("name") ? text(j["name"], "rules[].name") : dagger::describe(r.rule);
  dagger::validate(r.rule);
  return r;
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  c.kind = parse_experiment_kind(text(j["experiment"], "experiment"));
  c.master_seed = seed_value(j["seeds"]["master"], "seeds.master");
  for (const json& s : j["seeds"]["per_epoch_ic"]) c.per_epoch_ic.push_back(seed_value(s, "seeds.per_epoch_ic"));
  c.repetitions = count(j["repetitions"], "repetitions");
  c.jobs = count(j["jobs"], "jobs");
  c.kernel_backend = text(j["kernel_backend"], "kernel_backend");
  c.output_dir = text(j["output_dir"], "output_dir");

  const json& grid = j["grid"];
  c.pendulum.grid.theta = interval(grid["theta"], "grid.theta");
  c.pendulum.grid.theta_dot = interval(grid["theta_dot"], "grid.theta_dot");
  const std::vector<std::size_t> res = widths(grid["resolution"], "grid.resolution");
  if (res.size() != 2) throw ConfigError("'grid.resolution' must be [n_theta, n_theta_dot]");
  c.pendulum.grid.n_theta = res[0];
  c.pendulum.grid.n_theta_dot = res[1];

  const json& pj = j["pendulum"];
  pendulum::PendulumParams& p = c.pendulum.env.expert.params;
  p.a = number(pj["a"], "pendulum.a");
  p.b = number(pj["b"], "pendulum.b");
  p.c = number(pj["c"], "pendulum.c");
  p.u_min = number(pj["u_min"], "pendulum.u_min");
  p.u_max = number(pj["u_max"], "pendulum.u_max");
  p.dt = number(pj["dt"], "pendulum.dt");
  p.max_steps = count(pj["max_steps"], "pendulum.max_steps");
  p.basin_max_steps = count(pj["basin_max_steps"], "pendulum.basin_max_steps");
  p.convergence_radius = number(pj["convergence_radius"], "pendulum.convergence_radius");
  const json& gains = pj["gains"];
  if (!gains.is_array() || gains.size() != 2) throw ConfigError("'pendulum.gains' must be [K1, K2]");
  c.pendulum.env.expert.gains = {number(gains[0], "pendulum.gains"), number(gains[1], "pendulum.gains")};
  c.pendulum.env.ic_theta = interval(pj["ic_theta"], "pendulum.ic_theta");
  c.pendulum.env.ic_theta_dot = interval(pj["ic_theta_dot"], "pendulum.ic_theta_dot");
  c.pendulum.env.stop_on_convergence = pj["stop_on_convergence"].get<bool>();

  const json& ej = j["ensemble"];
  c.pendulum.ensemble.members = count(ej["members"], "ensemble.members");
  c.pendulum.ensemble.hidden = widths(ej["hidden"], "ensemble.hidden");
  c.pendulum.ensemble.activation = parse_enum(nn::parse_activation, ej["activation"], "ensemble.activation");
  c.pendulum.ensemble.head = parse_enum(nn::parse_output_head, ej["head"], "ensemble.head");

  const json& tj = j["train"];
  nn::TrainConfig& t = c.pendulum.train;
  t.epochs = count(tj["epochs"], "train.epochs");
  t.batch_size = count(tj["batch_size"], "train.batch_size");
  t.learning_rate = number(tj["learning_rate"], "train.learning_rate");
  t.l2_coeff = number(tj["l2_coeff"], "train.l2_coeff");
  const std::string loss = text(tj["loss"], "train.loss");
  if (loss == "mse") {
    t.loss = nn::LossKind::Mse;
  } else if (loss == "gaussian_nll") {
    t.loss = nn::LossKind::GaussianNll;
  } else {
    throw ConfigError("'train.loss' must be \"mse\" or \"gaussian_nll\"");
  }
  t.dropout_keep_prob = number(tj["dropout_keep_prob"], "train.dropout_keep_prob");

  const json& dj = j["dagger"];
  c.pendulum.dagger_epochs = count(dj["epochs"], "dagger.epochs");
  c.pendulum.trajectories_per_epoch = count(dj["trajectories_per_epoch"], "dagger.trajectories_per_epoch");
  c.pendulum.warm_start = dj["warm_start"].get<bool>();

  c.pendulum.basin_cache_dir = text(j["analysis"]["basin_cache_dir"], "analysis.basin_cache_dir");
  c.pendulum.full_novice_basin = j["analysis"]["full_novice_basin"].get<bool>();
  const std::string precision = text(j["analysis"]["basin_precision"], "analysis.basin_precision");
  if (precision == "float32") {
    c.pendulum.basin_precision = analysis::Precision::Single;
  } else if (precision == "float64") {
    c.pendulum.basin_precision = analysis::Precision::Double;
  } else {
    throw ConfigError("'analysis.basin_precision' must be \"float32\" or \"float64\"");
  }

  for (const json& r : j["rules"]) c.rules.push_back(parse_rule(r));

  const json& bj = j["budget"];
  c.budget.rules.clear();
  for (const json& r : bj["rules"]) {
    const std::string name = text(r, "budget.rules");
    if (name == "doubt") {
      c.budget.rules.push_back(analysis::ThresholdKind::Doubt);
    } else if (name == "discrepancy") {
      c.budget.rules.push_back(analysis::ThresholdKind::Discrepancy);
    } else {
      throw ConfigError("'budget.rules' entries must be \"doubt\" or \"discrepancy\"");
    }
  }
  c.budget.v0 = number(bj["v0"], "budget.v0");
  c.budget.dv = number(bj["dv"], "budget.dv");
  c.budget.bisection.tolerance = number(bj["tolerance"], "budget.tolerance");
  c.budget.bisection.max_iter = count(bj["max_iter"], "budget.max_iter");
  c.budget.novice_basin_repetitions = count(bj["novice_basin_repetitions"], "budget.novice_basin_repetitions");

  const json& gj = j["gp_compare"];
  GpCompareSettings& g = c.gp_compare;
  g.train_points = count(gj["train_points"], "gp_compare.train_points");
  g.train_range = interval(gj["train_range"], "gp_compare.train_range");
  g.query_range = interval(gj["query_range"], "gp_compare.query_range");
  g.query_points = count(gj["query_points"], "gp_compare.query_points");
  g.far_range = interval(gj["far_range"], "gp_compare.far_range");
  const json& gpj = gj["gp"];
  g.gp_init.length_scale = number(gpj["length_scale"], "gp_compare.gp.length_scale");
  g.gp_init.signal_variance = number(gpj["signal_variance"], "gp_compare.gp.signal_variance");
  g.gp_init.noise_variance = number(gpj["noise_variance"], "gp_compare.gp.noise_variance");
  g.gp_fit.restarts = count(gpj["restarts"], "gp_compare.gp.restarts");
  g.gp_fit.optimize_length_scale = gpj["optimize_length_scale"].get<bool>();
  g.gp_fit.optimize_signal_variance = gpj["optimize_signal_variance"].get<bool>();
  g.gp_fit.optimize_noise_variance = gpj["optimize_noise_variance"].get<bool>();
  g.gp_fit.steps = count(gpj["steps"], "gp_compare.gp.steps");
  g.gp_fit.learning_rate = number(gpj["learning_rate"], "gp_compare.gp.learning_rate");
  g.hidden = widths(gj["hidden"], "gp_compare.hidden");
  g.activation = parse_enum(nn::parse_activation, gj["activation"], "gp_compare.activation");
  g.members = count(gj["members"], "gp_compare.members");
  g.batch_size = count(gj["batch_size"], "gp_compare.batch_size");
  g.vanilla_epochs = count(gj["vanilla"]["epochs"], "gp_compare.vanilla.epochs");
  g.vanilla_learning_rate = number(gj["vanilla"]["learning_rate"], "gp_compare.vanilla.learning_rate");
  g.nll_epochs = count(gj["nll"]["epochs"], "gp_compare.nll.epochs");
  g.nll_learning_rate = number(gj["nll"]["learning_rate"], "gp_compare.nll.learning_rate");
  g.mc_epochs = count(gj["mc_dropout"]["epochs"], "gp_compare.mc_dropout.epochs");
  g.mc_learning_rate = number(gj["mc_dropout"]["learning_rate"], "gp_compare.mc_dropout.learning_rate");
  g.mc_keep_prob = number(gj["mc_dropout"]["keep_prob"], "gp_compare.mc_dropout.keep_prob");
  g.mc_samples = count(gj["mc_dropout"]["samples"], "gp_compare.mc_dropout.samples");
  return c;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::GpCompare:
      return "gp-compare";
    case ExperimentKind::PendulumBudget:
      return "pendulum-budget";
    case ExperimentKind::PendulumFixed:
      return "pendulum-fixed";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "gp-compare") return ExperimentKind::GpCompare;
  if (name == "pendulum-budget") return ExperimentKind::PendulumBudget;
  if (name == "pendulum-fixed") return ExperimentKind::PendulumFixed;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

double BudgetSettings::budget(std::size_t epoch) const {
  const double v = v0 + static_cast<double>(epoch == 0 ? 0 : epoch - 1) * dv;
  return std::min(1.0, v);
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.pendulum.train.l2_coeff = 1e-5;
  c.gp_compare.gp_fit.optimize_length_scale = true;
  switch (kind) {
    case ExperimentKind::GpCompare:
      c.repetitions = 1;
      break;
    case ExperimentKind::PendulumBudget:
      c.repetitions = 20;
      c.pendulum.dagger_epochs = 3;
      break;
    case ExperimentKind::PendulumFixed:
      c.repetitions = 30;
      c.pendulum.dagger_epochs = 6;
      c.rules = {
          {"doubt_chi_1e-3", dagger::DoubtRule{1e-3}},
          {"discrepancy_tau_1e-1", dagger::DiscrepancyRule{1e-1}},
          {"discrepancy_tau_5e-2", dagger::DiscrepancyRule{5e-2}},
      };
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  require(repetitions >= 1, "repetitions must be >= 1");
  require(jobs >= 1, "jobs must be >= 1");
  try {
    simd::parse_backend(kernel_backend);
    pendulum.grid.validate();
    pendulum.env.validate();
    pendulum.ensemble.validate();
    pendulum.train.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  require(pendulum.trajectories_per_epoch >= 1, "dagger.trajectories_per_epoch must be >= 1");
  if (kind == ExperimentKind::PendulumFixed) {
    require(!rules.empty(), "pendulum-fixed needs at least one rule");
    for (const NamedRule& r : rules) {
      require(!std::holds_alternative<dagger::VanillaRule>(r.rule),
              "pendulum-fixed rules must be deterministic (permitted sets are undefined for vanilla)");
      require(!r.name.empty() && r.name.find_first_of(",/\\\n\"") == std::string::npos,
              "rule names must be non-empty and free of , / \\ \" and newlines");
    }
    for (std::size_t i = 0; i < rules.size(); ++i)
      for (std::size_t k = i + 1; k < rules.size(); ++k) require(rules[i].name != rules[k].name, "duplicate rule name");
  }
  if (kind == ExperimentKind::PendulumBudget) {
    require(!budget.rules.empty(), "budget.rules must not be empty");
    require(budget.v0 >= 0.0 && budget.v0 <= 1.0 && budget.dv >= 0.0, "budget v0 must lie in [0, 1] and dv >= 0");
    require(budget.bisection.tolerance >= 0.0, "budget.tolerance must be >= 0");
    require(pendulum.dagger_epochs >= 1, "dagger.epochs must be >= 1");
  }
  if (kind != ExperimentKind::GpCompare) {
    require(pendulum.ensemble.head == nn::OutputHead::PointEstimate || pendulum.train.loss == nn::LossKind::GaussianNll,
            "a mean/log-variance ensemble must be trained with gaussian_nll");
  }
  if (kind == ExperimentKind::GpCompare) {
    const GpCompareSettings& g = gp_compare;
    require(g.train_points >= 1, "gp_compare.train_points must be >= 1");
    require(g.query_points >= 2, "gp_compare.query_points must be >= 2");
    require(g.train_range.lo < g.train_range.hi && g.query_range.lo < g.query_range.hi &&
                g.far_range.lo <= g.far_range.hi,
            "gp_compare ranges must satisfy lo < hi");
    require(g.gp_init.length_scale > 0.0 && g.gp_init.signal_variance > 0.0 && g.gp_init.noise_variance >= 0.0,
            "gp_compare.gp hyperparameters out of range");
    require(g.members >= 2, "gp_compare.members must be >= 2");
    require(g.batch_size >= 1, "gp_compare.batch_size must be >= 1");
    require(g.mc_keep_prob > 0.0 && g.mc_keep_prob <= 1.0, "gp_compare.mc_dropout.keep_prob must lie in (0, 1]");
    require(g.mc_samples >= 2, "gp_compare.mc_dropout.samples must be >= 2");
    require(g.vanilla_learning_rate > 0.0 && g.nll_learning_rate > 0.0 && g.mc_learning_rate > 0.0,
            "gp_compare learning rates must be > 0");
  }
}

std::string ExperimentConfig::to_json_text() const { return to_json(*this).dump(2); }

std::uint64_t ExperimentConfig::config_hash() const {
  json j = to_json(*this);
  j.erase("jobs");
  j.erase("output_dir");
  j["analysis"].erase("basin_cache_dir");
  return fnv1a64(j.dump());
}

ExperimentConfig parse_config(std::string_view json_text, std::optional<ExperimentKind> expected) {
  json user;
  try {
    user = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentKind kind;
  if (user.contains("experiment")) {
    if (!user["experiment"].is_string()) throw ConfigError("'experiment' must be a string");
    kind = parse_experiment_kind(user["experiment"].get<std::string>());
    if (expected && *expected != kind)
      throw ConfigError("config is for '" + std::string(to_string(kind)) + "' but '" +
                        std::string(to_string(*expected)) + "' was requested");
  } else if (expected) {
    kind = *expected;
  } else {
    throw ConfigError("config does not name an experiment");
  }

  json merged = to_json(default_config(kind));
  // Rule lists are replaced wholesale rather than merged element by element.
  const bool user_rules = user.contains("rules");
  if (user_rules && !user["rules"].is_array()) throw ConfigError("'rules' must be an array");
  json user_copy = user;
  user_copy["experiment"] = to_string(kind);
  merge_strict(merged, user_copy, "");
  ExperimentConfig config = from_json(merged);
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), expected);
}

dagger::DaggerSeeds run_seeds(const ExperimentConfig& config, std::size_t rule_id, std::size_t rep) {
  dagger::DaggerSeeds seeds;
  seeds.initial_conditions = derive_seed(config.master_seed, {0x1c, rep});
  for (std::uint64_t s : config.per_epoch_ic) seeds.per_epoch_ic.push_back(derive_seed(s, {rep}));
  seeds.run = derive_seed(config.master_seed, {0x2a, rule_id, rep});
  return seeds;
}

}  // namespace edagger::exp
