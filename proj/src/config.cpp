#include "gvh/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gvh {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as typos.
class Section {
public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key_path(key) + ": must be finite");
    return x;
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(key_path(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     std::initializer_list<const char*> allowed) {
    const std::string v = text(key, fallback);
    for (const char* a : allowed)
      if (v == a) return v;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ConfigError(key_path(key) + ": '" + v + "' is not one of {" + list + "}");
  }

  Section child(const std::string& key) {
    if (!has(key)) return Section(empty_object(), key_path(key));
    return Section(raw(key), key_path(key));
  }

  void forbid(const std::string& key, const std::string& why) const {
    if (has(key)) throw ConfigError(key_path(key) + ": " + why);
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()) + ": unknown key");
  }

private:
  static const json& empty_object() {
    static const json e = json::object();
    return e;
  }
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

// Snaps a trading time to the nearest grid point. Points farther than half
// a step from every grid point cannot occur on a grid; an exact tie between
// two neighbours is ambiguous and rejected.
double snap(double t, const TimeGrid& grid, const std::string& path,
            std::vector<std::string>& warnings) {
  const std::size_t i = grid.nearest_index(t);
  const double d = std::abs(grid[i] - t);
  if (d <= 1e-12 * std::max(1.0, grid.horizon())) return grid[i];
  // Half the length of the cell that contains t.
  const double half_cell = 0.5 * (t > grid[i] ? grid.dt(i + 1) : grid.dt(i));
  if (!(d < half_cell))
    throw ConfigError(path + ": " + fmt(t) + " is not within half a step of a unique grid point");
  warnings.push_back(path + ": " + fmt(t) + " snapped to grid time " + fmt(grid[i]));
  return grid[i];
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  Section root(doc, "");

  {
    Section m = root.child("model");
    cfg.model_kind = m.choice("kind", "brownian", {"brownian", "fbm", "mixed_fbm", "custom"});
    if (cfg.model_kind == "fbm" || cfg.model_kind == "mixed_fbm") {
      cfg.hurst = m.number("hurst", 0.75);
      if (cfg.model_kind == "fbm")
        require(cfg.hurst >= 0.5 && cfg.hurst < 1.0,
                "model.hurst: " + fmt(cfg.hurst) + " outside the admissible range [1/2, 1)");
      else
        require(cfg.hurst > 0.5 && cfg.hurst < 1.0,
                "model.hurst: " + fmt(cfg.hurst) + " outside the admissible range (1/2, 1)");
    } else {
      m.forbid("hurst", "only used by fbm and mixed_fbm");
      cfg.hurst = 0.5;
    }
    if (cfg.model_kind == "custom") {
      require(m.has("covariance"), "model.covariance: required for custom models");
      cfg.covariance = m.text("covariance", "");
      bool known = false;
      for (const auto& n : named_custom_models()) known = known || n == cfg.covariance;
      std::string list;
      for (const auto& n : named_custom_models()) list += (list.empty() ? "" : ", ") + n;
      require(known, "model.covariance: unknown covariance '" + cfg.covariance + "' (known: " +
                         list + ")");
    } else {
      m.forbid("covariance", "only used by custom models");
    }
    cfg.kernel = m.choice("kernel", "cholesky", {"cholesky", "analytic", "auto"});
    if (cfg.kernel == "analytic")
      require(cfg.model_kind == "brownian" || cfg.model_kind == "fbm",
              "model.kernel: no analytic kernel for " + cfg.model_kind);
    m.finish();
  }

  {
    Section mk = root.child("market");
    cfg.s0 = mk.number("s0", 100.0);
    require(cfg.s0 > 0.0, "market.s0: must be positive");
    cfg.maturity = mk.number("maturity", 1.0);
    require(cfg.maturity > 0.0, "market.maturity: must be positive");
    Section d = mk.child("drift");
    cfg.drift_kind = d.choice("kind", "constant", {"constant", "piecewise_linear"});
    if (cfg.drift_kind == "constant") {
      d.forbid("knots", "only used by piecewise_linear drift");
      cfg.drift_rate = d.number("rate", 0.1);
    } else {
      d.forbid("rate", "only used by constant drift");
      require(d.has("knots"), "market.drift.knots: required for piecewise_linear drift");
      const json& knots = d.raw("knots");
      require(knots.is_array() && !knots.empty(),
              "market.drift.knots: expected a nonempty array of [t, mu] pairs");
      for (std::size_t i = 0; i < knots.size(); ++i) {
        const json& k = knots[i];
        const std::string p = "market.drift.knots[" + std::to_string(i) + "]";
        require(k.is_array() && k.size() == 2 && k[0].is_number() && k[1].is_number(),
                p + ": expected [t, mu]");
        cfg.drift_knots.emplace_back(k[0].get<double>(), k[1].get<double>());
      }
      try {
        (void)Drift::piecewise_linear(cfg.drift_knots);
      } catch (const ModelError& e) {
        throw ConfigError(std::string("market.drift.knots: ") + e.what());
      }
    }
    d.finish();
    mk.finish();
  }

  {
    Section g = root.child("grid");
    const auto steps = g.unsigned_int("steps", 64);
    require(steps >= 2 && steps <= 1u << 14, "grid.steps: must lie in [2, 16384]");
    cfg.steps = static_cast<std::size_t>(steps);
    g.finish();
  }
  const TimeGrid grid = make_grid(cfg);

  {
    Section tr = root.child("trading");
    require(!(tr.has("count") && tr.has("times")), "trading: give either count or times, not both");
    std::vector<double> raw;
    if (tr.has("times")) {
      const json& times = tr.raw("times");
      require(times.is_array() && !times.empty(), "trading.times: expected a nonempty array");
      for (std::size_t i = 0; i < times.size(); ++i) {
        require(times[i].is_number(), "trading.times[" + std::to_string(i) + "]: expected a number");
        raw.push_back(times[i].get<double>());
      }
    } else {
      const auto count = tr.unsigned_int("count", 10);
      require(count >= 1, "trading.count: must be at least 1");
      for (std::uint64_t i = 1; i <= count; ++i)
        raw.push_back(static_cast<double>(i) * cfg.maturity / static_cast<double>(count + 1));
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const std::string p = "trading.times[" + std::to_string(i) + "]";
      require(raw[i] > 0.0 && raw[i] < cfg.maturity,
              p + ": " + fmt(raw[i]) + " must lie strictly inside (0, T)");
      const double s = snap(raw[i], grid, p, cfg.warnings);
      require(s > 0.0 && s < cfg.maturity, p + ": snaps onto an endpoint of [0, T]");
      require(cfg.trading_times.empty() || s > cfg.trading_times.back(),
              p + ": trading times must be strictly increasing after snapping to the grid");
      cfg.trading_times.push_back(s);
    }
    tr.finish();
  }

  {
    Section p = root.child("payoff");
    cfg.payoff_kind = p.choice("kind", "call", {"call", "put", "identity", "constant"});
    if (cfg.payoff_kind == "call" || cfg.payoff_kind == "put") {
      cfg.strike = p.number("strike", cfg.s0);
      require(cfg.strike > 0.0, "payoff.strike: must be positive");
    } else {
      p.forbid("strike", "only used by call and put");
    }
    if (cfg.payoff_kind == "constant")
      cfg.payoff_value = p.number("value", 1.0);
    else
      p.forbid("value", "only used by constant payoffs");
    p.finish();
  }

  {
    Section h = root.child("hedge");
    cfg.cost = h.number("cost", 0.0);
    require(cfg.cost >= 0.0 && cfg.cost < 1.0,
            "hedge.cost: " + fmt(cfg.cost) + " outside the admissible range k in [0, 1)");
    cfg.init = h.choice("init", "recursive", {"recursive", "min_cost"});
    h.finish();
  }

  {
    Section s = root.child("simulation");
    const auto paths = s.unsigned_int("paths", 100);
    require(paths >= 1 && paths <= 10'000'000, "simulation.paths: must lie in [1, 1e7]");
    cfg.paths = static_cast<std::size_t>(paths);
    cfg.seed = s.unsigned_int("seed", 1);
    s.finish();
  }

  {
    Section q = root.child("quadrature");
    const auto order = q.unsigned_int("order", 64);
    require(order >= 2 && order <= 512, "quadrature.order: must lie in [2, 512]");
    cfg.quad_order = static_cast<int>(order);
    q.finish();
  }

  {
    Section pr = root.child("prediction");
    const double u = pr.number("condition_time", 0.5 * cfg.maturity);
    require(u >= 0.0 && u < cfg.maturity,
            "prediction.condition_time: " + fmt(u) + " must lie in [0, T)");
    cfg.condition_time = snap(u, grid, "prediction.condition_time", cfg.warnings);
    require(cfg.condition_time < cfg.maturity, "prediction.condition_time: snaps onto T");
    const auto n = pr.unsigned_int("continuations", 2000);
    require(n >= 2, "prediction.continuations: must be at least 2");
    cfg.continuations = static_cast<std::size_t>(n);
    pr.finish();
  }

  {
    Section o = root.child("output");
    cfg.output_dir = o.text("dir", "");
    o.finish();
  }

  root.finish();
  return cfg;
}

std::string resolved_json(const ExperimentConfig& cfg, bool with_output) {
  json j;
  json model = {{"kind", cfg.model_kind}, {"kernel", cfg.kernel}};
  if (cfg.model_kind == "fbm" || cfg.model_kind == "mixed_fbm") model["hurst"] = cfg.hurst;
  if (cfg.model_kind == "custom") model["covariance"] = cfg.covariance;
  j["model"] = model;

  json drift = {{"kind", cfg.drift_kind}};
  if (cfg.drift_kind == "constant") {
    drift["rate"] = cfg.drift_rate;
  } else {
    json knots = json::array();
    for (const auto& [t, mu] : cfg.drift_knots) knots.push_back({t, mu});
    drift["knots"] = knots;
  }
  j["market"] = {{"s0", cfg.s0}, {"maturity", cfg.maturity}, {"drift", drift}};
  j["grid"] = {{"steps", cfg.steps}};
  j["trading"] = {{"times", cfg.trading_times}};

  json payoff = {{"kind", cfg.payoff_kind}};
  if (cfg.payoff_kind == "call" || cfg.payoff_kind == "put") payoff["strike"] = cfg.strike;
  if (cfg.payoff_kind == "constant") payoff["value"] = cfg.payoff_value;
  j["payoff"] = payoff;

  j["hedge"] = {{"cost", cfg.cost}, {"init", cfg.init}};
  j["simulation"] = {{"paths", cfg.paths}, {"seed", cfg.seed}};
  j["quadrature"] = {{"order", cfg.quad_order}};
  j["prediction"] = {{"condition_time", cfg.condition_time},
                     {"continuations", cfg.continuations}};
  if (with_output) j["output"] = {{"dir", cfg.output_dir}};
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved_json(cfg, false)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NoiseModel make_noise(const ExperimentConfig& cfg) {
  if (cfg.model_kind == "brownian") return NoiseModel::brownian();
  if (cfg.model_kind == "fbm") return NoiseModel::fractional(cfg.hurst);
  if (cfg.model_kind == "mixed_fbm") return NoiseModel::mixed_fractional(cfg.hurst);
  return named_custom_model(cfg.covariance);
}

MarketModel make_market(const ExperimentConfig& cfg) {
  Drift drift = cfg.drift_kind == "constant" ? Drift::constant_rate(cfg.drift_rate)
                                             : Drift::piecewise_linear(cfg.drift_knots);
  return MarketModel(make_noise(cfg), cfg.s0, std::move(drift), cfg.maturity);
}

TimeGrid make_grid(const ExperimentConfig& cfg) { return TimeGrid::uniform(cfg.maturity, cfg.steps); }

KernelMethod kernel_method(const ExperimentConfig& cfg) {
  if (cfg.kernel == "analytic") return KernelMethod::analytic;
  if (cfg.kernel == "auto") return KernelMethod::automatic;
  return KernelMethod::cholesky;
}

EuropeanPayoff make_payoff(const ExperimentConfig& cfg) {
  if (cfg.payoff_kind == "call") return EuropeanPayoff::call(cfg.strike);
  if (cfg.payoff_kind == "put") return EuropeanPayoff::put(cfg.strike);
  if (cfg.payoff_kind == "identity") return EuropeanPayoff::identity();
  return EuropeanPayoff::constant(cfg.payoff_value);
}

InitPolicy init_policy(const ExperimentConfig& cfg) {
  return cfg.init == "min_cost" ? InitPolicy::min_cost : InitPolicy::recursive;
}

std::vector<std::size_t> trading_indices(const ExperimentConfig& cfg, const TimeGrid& grid) {
  std::vector<std::size_t> idx{0};
  for (double t : cfg.trading_times) {
    const auto i = grid.index_of(t, 1e-9 * std::max(1.0, grid.horizon()));
    if (!i) throw ConfigError("trading time " + fmt(t) + " is not on the simulation grid");
    idx.push_back(*i);
  }
  return idx;
}

std::size_t condition_index(const ExperimentConfig& cfg, const TimeGrid& grid) {
  const auto i = grid.index_of(cfg.condition_time, 1e-9 * std::max(1.0, grid.horizon()));
  if (!i) throw ConfigError("prediction.condition_time is not on the simulation grid");
  return *i;
}

}  // namespace gvh
