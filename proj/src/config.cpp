#include "critheat/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace critheat {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"eig",          "robin",    "gammastar", "map",
                                              "ansatz-error", "nonlocal", "evolve",    "threshold"};
  return names;
}

namespace {

// Strict view of a JSON object: typed getters, and unknown keys are rejected in finish().
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }
  void point(const char* key, Point& out) {
    seen_.insert(key);
    if (!has(key)) return;
    out = to_point(j_.at(key), where_ + "." + key);
  }
  const Json* sub(const char* key) {
    seen_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }
  static Point to_point(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
    Point p;
    for (int a = 0; a < 3; ++a) {
      if (!v[a].is_number()) throw ConfigError(where + ": expected numbers");
      p[a] = v[a].get<double>();
    }
    return p;
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Json point_json(const Point& p) { return Json::array({p[0], p[1], p[2]}); }

}  // namespace

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  Reader r(j, "config");
  r.get("command", c.command);
  if (const Json* d = r.sub("domain")) {
    Reader rd(*d, "domain");
    std::string kind = to_string(c.domain.kind), mode = to_string(c.domain.mode);
    rd.get("kind", kind);
    rd.get("mode", mode);
    c.domain.kind = domain_kind_from_string(kind);
    c.domain.mode = mode_from_string(mode);
    rd.get("resolution", c.domain.resolution);
    rd.get("radius", c.domain.radius);
    rd.point("edges", c.domain.edges);
    rd.get("deformation", c.domain.deformation);
    rd.get("amplitude", c.domain.amplitude);
    rd.finish();
  }
  if (const Json* s = r.sub("spectral")) {
    Reader rs(*s, "spectral");
    rs.get("K", c.K);
    rs.get("tol", c.eig_tol);
    rs.finish();
  }
  if (const Json* g = r.sub("gamma")) {
    if (!g->is_number()) throw ConfigError("config.gamma: expected a number or null");
    c.gamma = g->get<double>();
  }
  r.get("gammas", c.gammas);
  r.point("q", c.q);
  if (const Json* p = r.sub("points")) {
    if (!p->is_array()) throw ConfigError("config.points: expected a list of points");
    for (const auto& v : *p) c.points.push_back(Reader::to_point(v, "config.points"));
  }
  if (const Json* m = r.sub("map")) {
    Reader rm(*m, "map");
    rm.point("direction", c.map.direction);
    rm.get("count", c.map.count);
    rm.get("max_fraction", c.map.max_fraction);
    rm.finish();
  }
  if (const Json* n = r.sub("nonlocal")) {
    Reader rn(*n, "nonlocal");
    auto& p = c.nonlocal;
    rn.get("l1", p.l1);
    rn.get("t0", p.t0);
    rn.get("t_end", p.t_end);
    rn.get("dt", p.dt);
    rn.get("compare_end", p.compare_end);
    rn.get("abscissa_frac", p.abscissa_frac);
    rn.get("bromwich_tol", p.bromwich_tol);
    rn.get("tau_lo", p.tau_lo);
    rn.get("tau_hi", p.tau_hi);
    rn.get("tau_count", p.tau_count);
    rn.get("pde_oracle", p.pde_oracle);
    rn.finish();
  }
  if (const Json* a = r.sub("ansatz")) {
    Reader ra(*a, "ansatz");
    ra.get("mus", c.ansatz.mus);
    ra.get("gamma_factor", c.ansatz.gamma_factor);
    ra.finish();
  }
  if (const Json* e = r.sub("evolve")) {
    Reader re(*e, "evolve");
    auto& p = c.evolve;
    std::string scheme = to_string(p.scheme);
    re.get("scheme", scheme);
    p.scheme = scheme_from_string(scheme);
    re.get("dt0", p.dt0);
    re.get("dt_min", p.dt_min);
    re.get("rel_change", p.rel_change);
    re.get("safety", p.safety);
    re.get("m_max", p.m_max);
    re.get("decay_ratio", p.decay_ratio);
    re.get("horizon", p.horizon);
    re.get("record_every", p.record_every);
    re.get("energy_tol", p.energy_tol);
    re.get("energy_guard", p.energy_guard);
    re.get("max_steps", p.max_steps);
    re.finish();
  }
  if (const Json* i = r.sub("initial")) {
    Reader ri(*i, "initial");
    ri.get("kind", c.initial.kind);
    ri.get("amplitude", c.initial.amplitude);
    ri.get("mu0", c.initial.mu0);
    ri.finish();
  }
  if (const Json* w = r.sub("rate_window")) {
    if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number() || !(*w)[1].is_number())
      throw ConfigError("config.rate_window: expected [t_lo, t_hi] or null");
    c.rate_window = std::make_pair((*w)[0].get<double>(), (*w)[1].get<double>());
  }
  if (const Json* t = r.sub("threshold")) {
    Reader rt(*t, "threshold");
    auto& p = c.threshold;
    rt.get("alphas", p.alphas);
    rt.get("edge", p.edge);
    rt.get("alpha_lo", p.alpha_lo);
    rt.get("alpha_hi", p.alpha_hi);
    rt.get("t_end", p.t_end);
    rt.get("bisect_tol", p.bisect_tol);
    rt.get("separation", p.separation);
    rt.finish();
  }
  r.get("output", c.output);
  r.get("cache", c.cache);
  r.get("jobs", c.jobs);
  r.finish();
  c.validate();
  return c;
}

Json RunConfig::to_json() const {
  Json j;
  j["command"] = command;
  j["domain"] = {{"kind", to_string(domain.kind)},
                 {"mode", to_string(domain.mode)},
                 {"resolution", domain.resolution},
                 {"radius", domain.radius},
                 {"edges", point_json(domain.edges)},
                 {"deformation", domain.deformation},
                 {"amplitude", domain.amplitude}};
  j["spectral"] = {{"K", K}, {"tol", eig_tol}};
  j["gamma"] = gamma ? Json(*gamma) : Json(nullptr);
  j["gammas"] = gammas;
  j["q"] = point_json(q);
  Json pts = Json::array();
  for (const auto& p : points) pts.push_back(point_json(p));
  j["points"] = pts;
  j["map"] = {{"direction", point_json(map.direction)}, {"count", map.count}, {"max_fraction", map.max_fraction}};
  const auto& n = nonlocal;
  j["nonlocal"] = {{"l1", n.l1},
                   {"t0", n.t0},
                   {"t_end", n.t_end},
                   {"dt", n.dt},
                   {"compare_end", n.compare_end},
                   {"abscissa_frac", n.abscissa_frac},
                   {"bromwich_tol", n.bromwich_tol},
                   {"tau_lo", n.tau_lo},
                   {"tau_hi", n.tau_hi},
                   {"tau_count", n.tau_count},
                   {"pde_oracle", n.pde_oracle}};
  j["ansatz"] = {{"mus", ansatz.mus}, {"gamma_factor", ansatz.gamma_factor}};
  const auto& e = evolve;
  j["evolve"] = {{"scheme", to_string(e.scheme)},
                 {"dt0", e.dt0},
                 {"dt_min", e.dt_min},
                 {"rel_change", e.rel_change},
                 {"safety", e.safety},
                 {"m_max", e.m_max},
                 {"decay_ratio", e.decay_ratio},
                 {"horizon", e.horizon},
                 {"record_every", e.record_every},
                 {"energy_tol", e.energy_tol},
                 {"energy_guard", e.energy_guard},
                 {"max_steps", e.max_steps}};
  j["initial"] = {{"kind", initial.kind}, {"amplitude", initial.amplitude}, {"mu0", initial.mu0}};
  j["rate_window"] = rate_window ? Json::array({rate_window->first, rate_window->second}) : Json(nullptr);
  const auto& t = threshold;
  j["threshold"] = {{"alphas", t.alphas},         {"edge", t.edge},
                    {"alpha_lo", t.alpha_lo},     {"alpha_hi", t.alpha_hi},
                    {"t_end", t.t_end},           {"bisect_tol", t.bisect_tol},
                    {"separation", t.separation}};
  j["output"] = output;
  j["cache"] = cache;
  j["jobs"] = jobs;
  return j;
}

std::string RunConfig::canonical() const { return to_json().dump(); }

std::string RunConfig::hash() const {
  Json j = to_json();
  j.erase("output");
  j.erase("cache");
  j.erase("jobs");
  return content_hash(j.dump());
}

void RunConfig::validate() const {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw ConfigError("unknown command '" + command + "'");
  domain.validate();
  if (K < 1) throw ConfigError("spectral.K must be >= 1");
  if (!(eig_tol > 0.0)) throw ConfigError("spectral.tol must be positive");
  if (gamma && !(*gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (map.count < 1) throw ConfigError("map.count must be >= 1");
  if (!(map.max_fraction > 0.0 && map.max_fraction < 1.0)) throw ConfigError("map.max_fraction must lie in (0, 1)");
  if (norm(map.direction) == 0.0) throw ConfigError("map.direction must be nonzero");
  const auto& n = nonlocal;
  if (!(n.dt > 0.0) || !(n.t_end > n.t0) || !(n.compare_end > n.t0) || n.compare_end > n.t_end)
    throw ConfigError("nonlocal: need dt > 0 and t0 < compare_end <= t_end");
  if (!(n.tau_lo > 0.0) || !(n.tau_hi > n.tau_lo) || n.tau_count < 2) throw ConfigError("nonlocal: invalid tau grid");
  for (double m : ansatz.mus)
    if (!(m > 0.0)) throw ConfigError("ansatz.mus must be positive");
  if (!(ansatz.gamma_factor >= 0.0)) throw ConfigError("ansatz.gamma_factor must be >= 0");
  evolve.validate();
  if (initial.kind != "phi1" && initial.kind != "u1") throw ConfigError("initial.kind must be phi1 or u1");
  if (!(initial.mu0 > 0.0)) throw ConfigError("initial.mu0 must be positive");
  if (rate_window && !(rate_window->second > rate_window->first)) throw ConfigError("rate_window must be increasing");
  if (threshold.alphas.empty()) throw ConfigError("threshold.alphas must not be empty");
  if (!(threshold.alpha_lo < threshold.alpha_hi)) throw ConfigError("threshold: need alpha_lo < alpha_hi");
  if (cache != "on" && cache != "off" && cache != "refresh") throw ConfigError("cache must be on, off or refresh");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return RunConfig::from_json(j);
}

void apply_override(Json& j, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value");
  std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (node->is_null()) *node = Json::object();
    if (!node->is_object()) throw ConfigError("override path '" + path + "' crosses a non-object");
    node = &(*node)[parts[i]];
  }
  if (node->is_null()) *node = Json::object();
  if (!node->is_object()) throw ConfigError("override path '" + path + "' crosses a non-object");
  (*node)[parts.back()] = value;
}

}  // namespace critheat
