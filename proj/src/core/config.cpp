#include "hempsim/core/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hempsim {

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::TwoLayer: return "two_layer";
    case Topology::SingleChain: return "single_chain";
    case Topology::None: return "none";
  }
  return "?";
}

Topology parse_topology(std::string_view s) {
  if (s == "two_layer" || s == "TwoLayer") return Topology::TwoLayer;
  if (s == "single_chain" || s == "SingleChain") return Topology::SingleChain;
  if (s == "none" || s == "None") return Topology::None;
  throw ParseError("unknown topology '" + std::string(s) + "'");
}

std::string_view to_string(ConfigErrorKind k) {
  switch (k) {
    case ConfigErrorKind::InvalidRange: return "InvalidRange";
    case ConfigErrorKind::InvalidProbability: return "InvalidProbability";
    case ConfigErrorKind::ZeroResource: return "ZeroResource";
    case ConfigErrorKind::InvalidValue: return "InvalidValue";
    case ConfigErrorKind::Unsupported: return "Unsupported";
  }
  return "?";
}

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid config:";
  for (const auto& i : issues) {
    out += "\n  ";
    out += to_string(i.kind);
    out += " [" + i.key + "] " + i.message;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

std::vector<ConfigIssue> check_config(const ScenarioConfig& cfg) {
  std::vector<ConfigIssue> out;
  auto issue = [&](ConfigErrorKind k, std::string key, std::string msg) {
    out.push_back({k, std::move(key), std::move(msg)});
  };
  auto probability = [&](double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) issue(ConfigErrorKind::InvalidProbability, key, "must lie in [0, 1]");
  };
  auto bounds = [&](const UniformBounds& b, const std::string& key) {
    if (!(b.lo <= b.hi)) issue(ConfigErrorKind::InvalidRange, key, "lo > hi");
    if (b.lo < 0.0) issue(ConfigErrorKind::InvalidRange, key, "negative lower bound");
  };
  auto fraction_bounds = [&](const UniformBounds& b, const std::string& key) {
    bounds(b, key);
    if (b.hi > 1.0) issue(ConfigErrorKind::InvalidRange, key, "fraction above 1");
  };
  auto servers = [&](int n, const char* key) {
    if (n < 1) issue(ConfigErrorKind::ZeroResource, key, "at least one server required");
  };
  auto non_negative = [&](double v, const char* key) {
    if (!(v >= 0.0)) issue(ConfigErrorKind::InvalidValue, key, "must be non-negative");
  };
  auto positive = [&](double v, const char* key) {
    if (!(v > 0.0)) issue(ConfigErrorKind::InvalidValue, key, "must be positive");
  };

  if (cfg.n_lots_per_season < 1) issue(ConfigErrorKind::InvalidValue, "lots.n", "need at least one lot per season");
  positive(cfg.season_length_days, "lots.season_length");
  non_negative(cfg.growth_rate_g, "growth.g");
  positive(cfg.cbd_thc_ratio_r, "growth.r");
  non_negative(cfg.lambda_var, "growth.lambda");
  positive(cfg.thc_preharvest_limit, "limits.gamma_v");
  positive(cfg.thc_final_limit, "limits.gamma");
  if (!(cfg.thc_final_limit < cfg.thc_preharvest_limit))
    issue(ConfigErrorKind::InvalidRange, "limits.gamma", "final limit must be below the pre-harvest limit");
  non_negative(cfg.harvest_deadline_days, "limits.harvest_deadline");
  non_negative(cfg.seedling_wait_limit, "limits.Lt");
  non_negative(cfg.dry_wait_limit, "limits.Ld");
  non_negative(cfg.harvest_delay_policy, "policy.harvest_delay");
  if (cfg.max_plc_passes < 1 || cfg.max_plc_passes > 2)
    issue(ConfigErrorKind::InvalidValue, "policy.max_plc_passes", "must be 1 or 2");

  servers(cfg.resources.n_f, "resources.n_f");
  servers(cfg.resources.n_l, "resources.n_l");
  servers(cfg.resources.n_p, "resources.n_p");
  if (cfg.resources.dynamic_dryers) {
    if (cfg.resources.n_d < 0) issue(ConfigErrorKind::ZeroResource, "resources.n_d", "negative dryer count");
  } else {
    servers(cfg.resources.n_d, "resources.n_d");
  }

  const auto& ch = cfg.chain;
  if (ch.topology == Topology::TwoLayer) {
    servers(ch.n_shards, "chain.n_shards");
    servers(ch.n_s, "chain.n_s");
    servers(ch.n_r, "chain.n_r");
    positive(ch.mu_v, "chain.mu_v");
    positive(ch.mu_c, "chain.mu_c");
  } else if (ch.topology == Topology::SingleChain) {
    servers(ch.n_r, "chain.n_r");
    positive(ch.mu_s, "chain.mu_s");
  }
  if (ch.panel_m != 1) issue(ConfigErrorKind::Unsupported, "chain.panel_m", "only a single-validator panel is modelled");
  probability(ch.miss_prob, "chain.miss_prob");
  probability(cfg.tamper_prob_p2, "adversary.p2");

  if (cfg.run.warmup_lots < 0) issue(ConfigErrorKind::InvalidValue, "run.warmup", "must be non-negative");
  if (cfg.run.run_length_lots < 1) issue(ConfigErrorKind::InvalidValue, "run.length", "must be positive");
  if (cfg.run.replications < 1) issue(ConfigErrorKind::InvalidValue, "run.reps", "must be positive");

  const auto& d = cfg.durations;
  bounds(d.germination, "durations.germination");
  bounds(d.soil_prep, "durations.soil_prep");
  bounds(d.transplant, "durations.transplant");
  bounds(d.cultivation, "durations.cultivation");
  bounds(d.preharvest_test, "durations.preharvest_test");
  bounds(d.harvest, "durations.harvest");
  bounds(d.drying, "durations.drying");
  bounds(d.extraction, "durations.extraction");
  bounds(d.winterization, "durations.winterization");
  bounds(d.plc, "durations.plc");

  fraction_bounds(cfg.yields.q_extract, "inputs.Q");
  fraction_bounds(cfg.yields.w_winter, "inputs.W");
  fraction_bounds(cfg.yields.q_u, "inputs.Q_u");
  fraction_bounds(cfg.yields.q_v, "inputs.Q_v");

  const auto& s = cfg.shapley;
  if (s.outer_K < 1) issue(ConfigErrorKind::InvalidValue, "shapley.outer_K", "must be positive");
  if (s.inner_I < 2) issue(ConfigErrorKind::InvalidValue, "shapley.inner_I", "must be at least 2");
  if (s.permutations_m < 1) issue(ConfigErrorKind::InvalidValue, "shapley.m", "must be positive");
  if (s.macro_J < 1) issue(ConfigErrorKind::InvalidValue, "shapley.macro_J", "must be positive");
  if (s.pilot_reps < 1) issue(ConfigErrorKind::InvalidValue, "shapley.pilot_reps", "must be positive");
  return out;
}

ScenarioConfig validate_config(const ScenarioConfig& cfg) {
  auto issues = check_config(cfg);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParseError("key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParseError("key '" + std::string(key) + "': expected an integer, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("key '" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

struct KeyBinding {
  std::string key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, std::string_view)> set;
};

template <typename Member>
KeyBinding real(std::string key, Member member) {
  return {key, [member](const ScenarioConfig& c) { return format_double(member(c)); },
          [member, key](ScenarioConfig& c, std::string_view v) { member(c) = parse_double(key, v); }};
}

template <typename Member>
KeyBinding integer(std::string key, Member member) {
  return {key, [member](const ScenarioConfig& c) { return std::to_string(member(c)); },
          [member, key](ScenarioConfig& c, std::string_view v) {
            using T = std::remove_cvref_t<decltype(member(c))>;
            member(c) = parse_int<T>(key, v);
          }};
}

template <typename Member>
KeyBinding boolean(std::string key, Member member) {
  return {key, [member](const ScenarioConfig& c) { return std::string(member(c) ? "true" : "false"); },
          [member, key](ScenarioConfig& c, std::string_view v) { member(c) = parse_bool(key, v); }};
}

template <typename Member>
void bounds_keys(std::vector<KeyBinding>& out, const std::string& prefix, Member member) {
  out.push_back(real(prefix + ".lo", [member](auto& c) -> auto& { return member(c).lo; }));
  out.push_back(real(prefix + ".hi", [member](auto& c) -> auto& { return member(c).hi; }));
}

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = [] {
    std::vector<KeyBinding> b;
    using C = ScenarioConfig;
    b.push_back(integer("lots.n", [](auto& c) -> auto& { return c.n_lots_per_season; }));
    b.push_back(real("lots.season_length", [](auto& c) -> auto& { return c.season_length_days; }));
    b.push_back(real("growth.g", [](auto& c) -> auto& { return c.growth_rate_g; }));
    b.push_back(real("growth.r", [](auto& c) -> auto& { return c.cbd_thc_ratio_r; }));
    b.push_back(real("growth.lambda", [](auto& c) -> auto& { return c.lambda_var; }));
    b.push_back(real("limits.gamma_v", [](auto& c) -> auto& { return c.thc_preharvest_limit; }));
    b.push_back(real("limits.gamma", [](auto& c) -> auto& { return c.thc_final_limit; }));
    b.push_back(real("limits.harvest_deadline", [](auto& c) -> auto& { return c.harvest_deadline_days; }));
    b.push_back(real("limits.Lt", [](auto& c) -> auto& { return c.seedling_wait_limit; }));
    b.push_back(real("limits.Ld", [](auto& c) -> auto& { return c.dry_wait_limit; }));
    b.push_back(real("policy.harvest_delay", [](auto& c) -> auto& { return c.harvest_delay_policy; }));
    b.push_back(integer("policy.max_plc_passes", [](auto& c) -> auto& { return c.max_plc_passes; }));
    b.push_back(integer("resources.n_f", [](auto& c) -> auto& { return c.resources.n_f; }));
    b.push_back(integer("resources.n_l", [](auto& c) -> auto& { return c.resources.n_l; }));
    b.push_back(integer("resources.n_d", [](auto& c) -> auto& { return c.resources.n_d; }));
    b.push_back(integer("resources.n_p", [](auto& c) -> auto& { return c.resources.n_p; }));
    b.push_back(boolean("resources.dynamic_dryers", [](auto& c) -> auto& { return c.resources.dynamic_dryers; }));
    b.push_back({"chain.topology", [](const C& c) { return std::string(to_string(c.chain.topology)); },
                 [](C& c, std::string_view v) { c.chain.topology = parse_topology(v); }});
    b.push_back(integer("chain.n_shards", [](auto& c) -> auto& { return c.chain.n_shards; }));
    b.push_back(integer("chain.n_s", [](auto& c) -> auto& { return c.chain.n_s; }));
    b.push_back(integer("chain.n_r", [](auto& c) -> auto& { return c.chain.n_r; }));
    b.push_back(real("chain.mu_v", [](auto& c) -> auto& { return c.chain.mu_v; }));
    b.push_back(real("chain.mu_c", [](auto& c) -> auto& { return c.chain.mu_c; }));
    b.push_back(real("chain.mu_s", [](auto& c) -> auto& { return c.chain.mu_s; }));
    b.push_back(integer("chain.panel_m", [](auto& c) -> auto& { return c.chain.panel_m; }));
    b.push_back(real("chain.miss_prob", [](auto& c) -> auto& { return c.chain.miss_prob; }));
    b.push_back(real("adversary.p2", [](auto& c) -> auto& { return c.tamper_prob_p2; }));
    b.push_back(integer("run.warmup", [](auto& c) -> auto& { return c.run.warmup_lots; }));
    b.push_back(integer("run.length", [](auto& c) -> auto& { return c.run.run_length_lots; }));
    b.push_back(integer("run.reps", [](auto& c) -> auto& { return c.run.replications; }));
    b.push_back(integer("run.seed", [](auto& c) -> auto& { return c.run.master_seed; }));
    bounds_keys(b, "durations.germination", [](auto& c) -> auto& { return c.durations.germination; });
    bounds_keys(b, "durations.soil_prep", [](auto& c) -> auto& { return c.durations.soil_prep; });
    bounds_keys(b, "durations.transplant", [](auto& c) -> auto& { return c.durations.transplant; });
    bounds_keys(b, "durations.cultivation", [](auto& c) -> auto& { return c.durations.cultivation; });
    bounds_keys(b, "durations.preharvest_test", [](auto& c) -> auto& { return c.durations.preharvest_test; });
    bounds_keys(b, "durations.harvest", [](auto& c) -> auto& { return c.durations.harvest; });
    bounds_keys(b, "durations.drying", [](auto& c) -> auto& { return c.durations.drying; });
    bounds_keys(b, "durations.extraction", [](auto& c) -> auto& { return c.durations.extraction; });
    bounds_keys(b, "durations.winterization", [](auto& c) -> auto& { return c.durations.winterization; });
    bounds_keys(b, "durations.plc", [](auto& c) -> auto& { return c.durations.plc; });
    bounds_keys(b, "inputs.Q", [](auto& c) -> auto& { return c.yields.q_extract; });
    bounds_keys(b, "inputs.W", [](auto& c) -> auto& { return c.yields.w_winter; });
    bounds_keys(b, "inputs.Q_u", [](auto& c) -> auto& { return c.yields.q_u; });
    bounds_keys(b, "inputs.Q_v", [](auto& c) -> auto& { return c.yields.q_v; });
    b.push_back(integer("shapley.outer_K", [](auto& c) -> auto& { return c.shapley.outer_K; }));
    b.push_back(integer("shapley.inner_I", [](auto& c) -> auto& { return c.shapley.inner_I; }));
    b.push_back(integer("shapley.m", [](auto& c) -> auto& { return c.shapley.permutations_m; }));
    b.push_back(integer("shapley.macro_J", [](auto& c) -> auto& { return c.shapley.macro_J; }));
    b.push_back(integer("shapley.pilot_reps", [](auto& c) -> auto& { return c.shapley.pilot_reps; }));
    return b;
  }();
  return table;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text, ScenarioConfig base) {
  std::map<std::string, const KeyBinding*, std::less<>> index;
  for (const auto& b : bindings()) index.emplace(b.key, &b);

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "chain.enabled") {
      // Shorthand: disabling the chain selects the no-ledger topology.
      if (!parse_bool(key, value)) base.chain.topology = Topology::None;
      continue;
    }
    const auto it = index.find(key);
    if (it == index.end())
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    it->second->set(base, value);
  }
  return base;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& b : bindings()) {
    out += b.key;
    out += " = ";
    out += b.get(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace hempsim
