#include "critheat/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "critheat/ansatz.hpp"
#include "critheat/green.hpp"
#include "critheat/nonlocal.hpp"

namespace critheat {

namespace fs = std::filesystem;

std::string cache_root(const RunConfig& cfg) {
  if (const char* env = std::getenv("CRITHEAT_CACHE"); env && *env) return env;
  return (fs::path(cfg.output) / ".critheat-cache").string();
}

Spectrum cached_spectrum(const DiscreteDomain& dom, int K, double tol, const RunConfig& cfg) {
  std::ostringstream key;
  key.precision(17);
  key << dom.spec().canonical() << ";K=" << K << ";tol=" << tol;
  const fs::path path = fs::path(cache_root(cfg)) / ("spectrum-" + content_hash(key.str()) + ".bin");
  if (cfg.cache == "on") {
    if (auto sp = load_spectrum(path.string()); sp && sp->domain_hash == dom.hash() && sp->count() == K) return *sp;
  }
  Spectrum sp = eigenpairs(dom, K, tol);
  if (cfg.cache != "off") {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (!ec) save_spectrum(sp, path.string());
  }
  return sp;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Json point_json(const Point& p) { return Json::array({p[0], p[1], p[2]}); }

bool unit_ball_center(const DiscreteDomain& dom, const Point& q) {
  return dom.spec().kind == DomainKind::UnitBall && norm(q) == 0.0;
}

double resolve_gamma(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp, double factor = 1.0) {
  if (cfg.gamma) return *cfg.gamma;
  return factor * gamma_star(dom, sp, cfg.q, 1e-12).value;
}

Eigen::VectorXd positive_phi1(const Spectrum& sp) {
  Eigen::VectorXd phi = sp.fields.col(0);
  if (phi.sum() < 0.0) phi = -phi;
  return phi;
}

Eigen::VectorXd u1_datum(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q, double mu0) {
  auto H = uses_ball_series(dom, q) ? make_ball_regular_part(gamma, q, dom.spec().effective_radius())
                                    : make_regular_part(dom, sp, gamma, q);
  BubbleParams p{mu0, q, gamma};
  Eigen::VectorXd u(dom.size());
  for (int i = 0; i < dom.size(); ++i) u[i] = u1(*H, p, dom.nodes()[i]);
  return u;
}

Json trajectory_summary(const Trajectory& tr) {
  Json j{{"status", to_string(tr.status)},
         {"t_end", tr.t_end},
         {"steps", tr.steps},
         {"rejected", tr.rejected},
         {"energy_violations", tr.energy_violations},
         {"max_energy_increase", tr.max_energy_increase},
         {"samples", tr.t.size()}};
  if (tr.status == Status::BlownUp) j["blowup_time"] = tr.blowup_time;
  if (!tr.message.empty()) j["message"] = tr.message;
  if (!tr.mu_hat.empty()) j["mu_hat_final"] = tr.mu_hat.back();
  return j;
}

Json rate_json(const RateFit& r) {
  return {{"slope", r.slope}, {"stderr", r.stderr_}, {"ci95", r.ci95}, {"drop", r.drop}, {"samples", r.samples}};
}

CommandResult cmd_eig(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  std::string csv = "k,lambda,residual\n";
  double max_res = 0.0;
  for (int k = 0; k < sp.count(); ++k) {
    csv += std::to_string(k + 1) + "," + fmt(sp.eigenvalues[k]) + "," + fmt(sp.residuals[k]) + "\n";
    max_res = std::max(max_res, sp.residuals[k]);
  }
  r.summary = {{"lambda", sp.eigenvalues},
               {"lambda1", sp.lambda1()},
               {"gap", sp.gap()},
               {"max_residual", max_res},
               {"unknowns", dom.size()},
               {"domain_hash", dom.hash()}};
  const auto& s = dom.spec();
  if (s.kind == DomainKind::Box) {
    double ref = 0.0;
    for (double e : s.edges) ref += kPi * kPi / (e * e);
    r.summary["lambda1_continuum"] = ref;
  } else if (s.kind != DomainKind::PerturbedBall) {
    r.summary["lambda1_continuum"] = kPi * kPi / (s.effective_radius() * s.effective_radius());
  }
  (void)cfg;
  r.files.emplace_back(".csv", csv);
  return r;
}

CommandResult cmd_robin(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  const bool exact = unit_ball_center(dom, cfg.q);
  std::string csv = exact ? "gamma,robin,closed_form\n" : "gamma,robin\n";
  Json vals = Json::array();
  double worst = 0.0;
  for (double g : cfg.gammas) {
    double v = robin(dom, sp, g, cfg.q);
    csv += fmt(g) + "," + fmt(v);
    Json e{{"gamma", g}, {"robin", v}};
    if (exact) {
      double c = ball_robin_center(g);
      csv += "," + fmt(c);
      e["closed_form"] = c;
      worst = std::max(worst, std::abs(v - c) / std::abs(c));
    }
    csv += "\n";
    vals.push_back(e);
  }
  r.summary = {{"q", point_json(cfg.q)}, {"values", vals}, {"series_path", uses_ball_series(dom, cfg.q)}};
  if (exact) r.summary["max_rel_error"] = worst;
  r.files.emplace_back(".csv", csv);
  return r;
}

CommandResult cmd_gammastar(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  auto gs = gamma_star(dom, sp, cfg.q, 1e-12);
  auto ad = admissible(dom, sp, cfg.q, 1e-12);
  r.summary = {{"q", point_json(cfg.q)},      {"gamma_star", gs.value}, {"bracket", {gs.lo, gs.hi}},
               {"iterations", gs.iterations}, {"admissible", ad.admissible}, {"margin", ad.margin},
               {"lambda1", ad.lambda1}};
  if (unit_ball_center(dom, cfg.q)) r.summary["closed_form"] = kPi * kPi / 4.0;
  return r;
}

CommandResult cmd_map(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  std::vector<Point> pts = cfg.points;
  if (pts.empty()) {
    const Point e = (1.0 / norm(cfg.map.direction)) * cfg.map.direction;
    const double D = dom.boundary_distance({0, 0, 0});
    for (int i = 0; i < cfg.map.count; ++i) {
      double s = cfg.map.count == 1 ? 0.0 : cfg.map.max_fraction * D * i / (cfg.map.count - 1);
      pts.push_back(s * e);
    }
  }
  auto m = gamma_star_map(dom, sp, pts, 1e-10, cfg.jobs);
  std::string csv = "x,y,z,gamma_star,admissible,margin,ok,error\n";
  int ok = 0;
  for (const auto& e : m.entries) {
    csv += fmt(e.q[0]) + "," + fmt(e.q[1]) + "," + fmt(e.q[2]) + "," + fmt(e.gamma_star) + "," +
           (e.admissible ? "1" : "0") + "," + fmt(e.margin) + "," + (e.ok ? "1" : "0") + ",\"" + e.error + "\"\n";
    ok += e.ok;
  }
  r.summary = {{"points", m.entries.size()}, {"ok", ok}, {"radially_increasing", m.radially_increasing}};
  if (ok > 0) {
    auto bn = bn_bounds(dom, sp, m);
    r.summary["bn_bounds"] = {{"lower", bn.lower},
                              {"upper_alpha3", bn.upper_alpha3},
                              {"upper_normalized", bn.upper_normalized},
                              {"druet_min", bn.druet_min},
                              {"lower_ok", bn.lower_ok}};
  }
  r.files.emplace_back(".csv", csv);
  return r;
}

CommandResult cmd_ansatz_error(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  const double g = resolve_gamma(cfg, dom, sp, cfg.ansatz.gamma_factor);
  auto H = uses_ball_series(dom, cfg.q) ? make_ball_regular_part(g, cfg.q, dom.spec().effective_radius())
                                        : make_regular_part(dom, sp, g, cfg.q);
  std::string csv = "mu,lambda_dot,gamma_regular,gamma_singular,xi_dot,linear_H,nonlinear,total\n";
  std::vector<double> lx, ly;
  for (double mu : cfg.ansatz.mus) {
    BubbleParams p{mu, cfg.q, g};
    auto e = error_u1(*H, p, 0.0, {0, 0, 0}, cfg.q);
    csv += fmt(mu) + "," + fmt(e.lambda_dot) + "," + fmt(e.gamma_regular) + "," + fmt(e.gamma_singular) + "," +
           fmt(e.xi_dot) + "," + fmt(e.linear_H) + "," + fmt(e.nonlinear) + "," + fmt(e.total()) + "\n";
    lx.push_back(std::log(mu));
    ly.push_back(std::log(std::abs(e.total())));
  }
  r.summary = {{"gamma", g}, {"robin", H->robin()}, {"q", point_json(cfg.q)}};
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= lx.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
    r.summary["center_error_exponent"] = sxy / sxx;
  }
  Point gradR = grad_robin(dom, sp, g, cfg.q);
  r.summary["grad_robin"] = point_json(gradR);
  if (norm(gradR) > 0.0 && g > 0.0) {
    auto xc = xi0_coefficients(gradR, g);
    const double mu0 = cfg.ansatz.mus.front();
    auto orth = check_orthogonality_M(xc.c, g, mu0, gradR);
    r.summary["xi0"] = {{"c", point_json(xc.c)},
                        {"c_printed", point_json(xc.c_printed)},
                        {"A", xc.integrals.a},
                        {"B", xc.integrals.b},
                        {"orthogonality", orth}};
    int i = 0;
    for (int a = 1; a < 3; ++a)
      if (std::abs(gradR[a]) > std::abs(gradR[i])) i = a;
    try {
      auto rep = phi3_radial_mode(mode_profile(xc.c[i], g, mu0, gradR[i]));
      r.summary["phi3"] = {{"mode", i + 1},
                           {"sup_phi", rep.sup_phi},
                           {"sup_weighted_dphi", rep.sup_weighted_dphi},
                           {"exponent_zero", rep.exponent_zero},
                           {"exponent_inf", rep.exponent_inf},
                           {"orthogonality", rep.orthogonality}};
    } catch (const NumericalError& e) {
      r.summary["phi3"] = {{"error", e.what()}, {"orthogonality", e.diagnostic()}};
    }
  }
  r.files.emplace_back(".csv", csv);
  return r;
}

CommandResult cmd_nonlocal(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  const auto& n = cfg.nonlocal;
  const double g = resolve_gamma(cfg, dom, sp);
  NonlocalKernel k(dom, sp, g, cfg.q);
  auto table = i_tau_table(k, log_grid(n.tau_lo, n.tau_hi, n.tau_count));
  r.files.emplace_back(".csv", table.to_csv());

  const double ts = k.tau_switch();
  auto fit = fit_small_tau(k, std::min(1e-6, 1e-3 * ts), std::min(1e-4, 0.1 * ts));
  const double tau_star = std::log(100.0) / (k.lambda2() - k.lambda1());
  auto zeros = count_zeros(k, -0.95 * k.lambda1(), 10.0 * k.lambda1(), 10.0 * k.lambda1());

  SigmaOptions so;
  so.abscissa_frac = n.abscissa_frac;
  so.tol = n.bromwich_tol;
  if (n.dt > ts) throw ConfigError("nonlocal.dt exceeds the kernel switch time " + fmt(ts));
  auto rt = nonlocal_round_trip(k, n.l1, n.t0, n.t_end, n.dt, n.compare_end, so);
  std::string series = "t,h,Lambda,dLambda\n";
  for (size_t i = 0; i < rt.forward.size(); ++i)
    series += fmt(rt.forward.t(i)) + "," + fmt(rt.forward.v[i]) + "," + fmt(rt.recovered_lambda.v[i]) + "," +
              fmt(rt.recovered.v[i]) + "\n";
  r.files.emplace_back(".series.csv", series);

  SigmaOptions so_rep = so;
  so_rep.tau_max = 1.0;
  auto rep = SigmaKernel(k, so_rep).report();
  r.summary = {{"gamma", g},
               {"q", point_json(cfg.q)},
               {"robin", k.robin()},
               {"tau_switch", ts},
               {"switch_mismatch", k.switch_mismatch()},
               {"small_tau", {{"c1", fit.c1}, {"reference", NonlocalKernel::singular_coefficient()}}},
               {"large_tau",
                {{"tau", tau_star},
                 {"ratio", k.I(tau_star) * std::exp(k.lambda1() * tau_star) / k.leading_coefficient()},
                 {"coefficient", k.leading_coefficient()}}},
               {"c_inf", k.c_inf()},
               {"zeros", {{"count", zeros.zeros}, {"min_abs", zeros.min_abs}}},
               {"sigma",
                {{"small_tau_exponent", rep.small_tau_exponent},
                 {"small_tau_constant", rep.small_tau_constant},
                 {"decay_rate", rep.decay_rate}}},
               {"round_trip", {{"rel_error", rt.rel_error}, {"rel_error_extension", rt.rel_error_ext}}},
               {"warnings", k.warnings()}};
  if (n.pde_oracle) {
    auto pde = forward_map_pde(dom, sp, g, cfg.q, rt.lambda_dot);
    double worst = 0.0;
    for (size_t i = 0; i < pde.size(); ++i)
      if (pde.t(i) >= n.t0 && pde.t(i) <= n.compare_end)
        worst = std::max(worst, std::abs(pde.v[i] - rt.forward.v[i]) / std::abs(rt.forward.v[i]));
    r.summary["pde_oracle_rel_diff"] = worst;
  }
  return r;
}

Eigen::VectorXd initial_datum(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp, double* gamma) {
  if (cfg.initial.kind == "phi1") return cfg.initial.amplitude * positive_phi1(sp);
  const double g = resolve_gamma(cfg, dom, sp);
  if (gamma) *gamma = g;
  return cfg.initial.amplitude * u1_datum(dom, sp, g, cfg.q, cfg.initial.mu0);
}

CommandResult cmd_evolve(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  double g = 0.0;
  Eigen::VectorXd u0 = initial_datum(cfg, dom, sp, &g);
  auto tr = evolve(dom, u0, cfg.evolve);
  r.summary = trajectory_summary(tr);
  r.summary["initial"] = cfg.initial.kind;
  if (cfg.initial.kind == "u1") r.summary["gamma"] = g;
  if (tr.status == Status::Decayed && tr.t.size() >= 6)
    r.summary["decay_rate"] = -log_sup_slope(tr, 0.5 * tr.t_end, tr.t_end).slope;
  if (cfg.rate_window) {
    auto fit = rate_estimate(tr, cfg.rate_window->first, cfg.rate_window->second);
    r.summary["rate"] = rate_json(fit);
    if (g > 0.0) r.summary["rate"]["predicted"] = 2.0 * g;
  }
  r.files.emplace_back(".csv", tr.to_csv());
  return r;
}

CommandResult cmd_threshold(const RunConfig& cfg, const DiscreteDomain& dom, const Spectrum& sp) {
  CommandResult r;
  auto kr = kaplan_dichotomy(dom, positive_phi1(sp), sp.lambda1(), cfg.threshold.alphas, cfg.evolve, cfg.jobs);
  std::string csv = "alpha,status,t_end,blowup_time,decay_rate,kaplan_y0,kaplan_guaranteed\n";
  Json entries = Json::array();
  for (const auto& e : kr.entries) {
    csv += fmt(e.alpha) + "," + to_string(e.status) + "," + fmt(e.t_end) + "," + fmt(e.blowup_time) + "," +
           fmt(e.decay_rate) + "," + fmt(e.kaplan_y0) + "," + (e.kaplan_guaranteed ? "1" : "0") + "\n";
    entries.push_back({{"alpha", e.alpha},
                       {"status", to_string(e.status)},
                       {"decay_rate", e.decay_rate},
                       {"energy_violations", e.energy_violations}});
  }
  r.files.emplace_back(".csv", csv);
  r.summary = {{"entries", entries}, {"monotone", kr.monotone}, {"kaplan_threshold", kr.kaplan_threshold},
               {"lambda1", sp.lambda1()}};
  if (kr.bracket) r.summary["bracket"] = {kr.bracket->first, kr.bracket->second};
  if (cfg.threshold.edge) {
    const double g = resolve_gamma(cfg, dom, sp);
    Eigen::VectorXd prof = u1_datum(dom, sp, g, cfg.q, cfg.initial.mu0);
    EdgeOptions eo;
    eo.t_end = cfg.threshold.t_end;
    eo.bisect_tol = cfg.threshold.bisect_tol;
    eo.separation = cfg.threshold.separation;
    auto th = track_threshold(dom, prof, cfg.threshold.alpha_lo, cfg.threshold.alpha_hi, cfg.evolve, eo);
    Json edge{{"gamma", g},
              {"alpha_decay", th.alpha_decay},
              {"alpha_blow", th.alpha_blow},
              {"stages", th.stages},
              {"bisections", th.bisections},
              {"trajectory", trajectory_summary(th.edge)},
              {"predicted_slope", 2.0 * g}};
    auto win = cfg.rate_window ? *cfg.rate_window : edge_window(th.edge);
    try {
      edge["rate"] = rate_json(rate_estimate(th.edge, win.first, win.second));
      edge["rate"]["window"] = {win.first, win.second};
    } catch (const ConfigError& e) {
      edge["rate"] = {{"error", e.what()}};
    }
    r.summary["edge"] = edge;
    r.files.emplace_back(".edge.csv", th.edge.to_csv());
  }
  return r;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write artifact " + p.string());
  os << content;
}

}  // namespace

CommandResult execute(const RunConfig& cfg) {
  cfg.validate();
  DiscreteDomain dom(cfg.domain);
  int K = cfg.K;
  Spectrum sp = cached_spectrum(dom, K, cfg.eig_tol, cfg);
  CommandResult r;
  const std::string& c = cfg.command;
  if (c == "eig") r = cmd_eig(cfg, dom, sp);
  else if (c == "robin") r = cmd_robin(cfg, dom, sp);
  else if (c == "gammastar") r = cmd_gammastar(cfg, dom, sp);
  else if (c == "map") r = cmd_map(cfg, dom, sp);
  else if (c == "ansatz-error") r = cmd_ansatz_error(cfg, dom, sp);
  else if (c == "nonlocal") r = cmd_nonlocal(cfg, dom, sp);
  else if (c == "evolve") r = cmd_evolve(cfg, dom, sp);
  else r = cmd_threshold(cfg, dom, sp);
  Json head{{"command", c}, {"status", "ok"}, {"config_hash", cfg.hash()}, {"domain", dom.spec().canonical()}};
  head.update(r.summary);
  r.summary = head;
  return r;
}

int run_command(const RunConfig& cfg, std::ostream& log) {
  const std::string stem = cfg.command + "-" + cfg.hash();
  const fs::path out(cfg.output);
  auto fail = [&](int code, const std::string& kind, const std::string& msg, const Json& extra) {
    Json err{{"command", cfg.command}, {"status", "error"}, {"kind", kind}, {"message", msg}};
    err.update(extra);
    std::error_code ec;
    fs::create_directories(out, ec);
    std::ofstream(out / (stem + ".json")) << err.dump(2) << "\n";
    log << err.dump() << "\n";
    return code;
  };
  try {
    CommandResult r = execute(cfg);
    fs::create_directories(out);
    write_file(out / (stem + ".json"), r.summary.dump(2) + "\n");
    log << (out / (stem + ".json")).string() << "\n";
    for (const auto& [suffix, content] : r.files) {
      write_file(out / (stem + suffix), content);
      log << (out / (stem + suffix)).string() << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    return fail(2, "config", e.what(), Json::object());
  } catch (const NumericalError& e) {
    return fail(3, "numerical", e.what(), {{"diagnostic", e.diagnostic()}});
  }
}

}  // namespace critheat
