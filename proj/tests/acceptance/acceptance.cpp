// Acceptance criteria, one per invocation: critheat_acceptance <id>; no argument runs all.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "critheat/ansatz.hpp"
#include "critheat/evolve.hpp"
#include "critheat/green.hpp"
#include "critheat/nonlocal.hpp"
#include "critheat/spectral.hpp"

using namespace critheat;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string num(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

DiscreteDomain radial_ball(int n) {
  DomainSpec s;
  s.mode = Mode::Radial;
  s.resolution = n;
  return DiscreteDomain(s);
}

const double kPi2 = kPi * kPi;

// 1. eigenvalues of the ball and the cube, second-order convergence
void c1_eigenvalues(Outcome& o) {
  auto db = radial_ball(1024);
  auto sb = eigenpairs(db, 2, 1e-10);
  o.check(rel(sb.lambda1(), kPi2) <= 0.005, "ball radial N=1024 lambda1=" + num(sb.lambda1(), 10) +
                                                " rel=" + num(rel(sb.lambda1(), kPi2), 3) + " (<=0.005)");
  auto db2 = radial_ball(512);
  auto sb2 = eigenpairs(db2, 2, 1e-10);
  double rb = (sb2.lambda1() - kPi2) / (sb.lambda1() - kPi2);
  o.check(rb >= 3.4 && rb <= 4.6, "ball error ratio 512/1024=" + num(rb, 4) + " (in [3.4,4.6])");

  auto t0 = std::chrono::steady_clock::now();
  DomainSpec c;
  c.kind = DomainKind::Box;
  c.resolution = 48;
  DiscreteDomain dc(c);
  auto sc = eigenpairs(dc, 2, 1e-10);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(rel(sc.lambda1(), 3 * kPi2) <= 0.01,
          "cube 48^3 lambda1=" + num(sc.lambda1(), 10) + " rel=" + num(rel(sc.lambda1(), 3 * kPi2), 3) + " (<=0.01)");
  o.check(secs < 60.0, "cube solve " + num(secs, 3) + "s (<60)");
  c.resolution = 24;
  auto sc2 = eigenpairs(DiscreteDomain(c), 2, 1e-10);
  double rc = (sc2.lambda1() - 3 * kPi2) / (sc.lambda1() - 3 * kPi2);
  o.check(rc >= 3.4 && rc <= 4.6, "cube error ratio 24/48=" + num(rc, 4) + " (in [3.4,4.6])");
}

// 2. Robin function at the ball center against alpha_3 sqrt(g) cot(sqrt(g))
void c2_robin(Outcome& o) {
  const std::vector<double> gammas{0.5, 1, 2, 4, 6, 8};
  auto worst = [&](const DiscreteDomain& d, const Spectrum& sp) {
    double w = 0.0;
    for (double g : gammas) w = std::max(w, rel(robin(d, sp, g, {0, 0, 0}), ball_robin_center(g)));
    return w;
  };
  auto dr = radial_ball(1024);
  double wr = worst(dr, eigenpairs(dr, 2, 1e-10));
  o.check(wr <= 0.01, "radial N=1024 max rel=" + num(wr, 3) + " (<=0.01)");
  DomainSpec s;
  s.resolution = 64;
  DiscreteDomain d3(s);
  double w3 = worst(d3, eigenpairs(d3, 2, 1e-8));
  o.check(w3 <= 0.01, "full3d 64^3 max rel=" + num(w3, 3) + " (<=0.01)");
}

// 3. gamma*(0) = pi^2 / 4 and admissibility at the center
void c3_gamma_star(Outcome& o) {
  auto d = radial_ball(1024);
  auto sp = eigenpairs(d, 2, 1e-10);
  auto a = admissible(d, sp, {0, 0, 0}, 1e-12);
  o.check(rel(a.gamma_star, kPi2 / 4) <= 0.005, "gamma*=" + num(a.gamma_star, 10) + " rel=" +
                                                    num(rel(a.gamma_star, kPi2 / 4), 3) + " (<=0.005)");
  o.check(a.admissible, std::string("admissible=") + (a.admissible ? "true" : "false"));
  o.check(rel(a.margin, kPi2 / 4) <= 0.005, "margin=" + num(a.margin, 8) + " vs pi^2/4");
}

// 4. (lambda_1 - gamma) R_gamma(0) -> -4 pi alpha_3 phi_1(0)^2 as gamma -> lambda_1
void c4_near_lambda1(Outcome& o) {
  auto d = radial_ball(1024);
  auto sp = eigenpairs(d, 2, 1e-10);
  const double g = 0.95 * sp.lambda1();
  const double lhs = (sp.lambda1() - g) * robin(d, sp, g, {0, 0, 0});
  const double phi0 = sp.value(d, 0, {0, 0, 0});
  const double rhs = -4.0 * kPi * kAlpha3 * phi0 * phi0;
  o.check(rel(lhs, rhs) <= 0.05,
          "(l1-g)R=" + num(lhs, 8) + " target=" + num(rhs, 8) + " rel=" + num(rel(lhs, rhs), 3) + " (<=0.05)");
}

// 5. lambda_1 - gamma*(q) ~ 8 pi (d_nu phi_1)^2 d^3 near the boundary
void c5_boundary(Outcome& o) {
  auto d = radial_ball(1024);
  auto sp = eigenpairs(d, 2, 1e-10);
  std::vector<double> ds;
  for (int i = 0; i < 7; ++i) ds.push_back(0.05 * std::pow(4.0, i / 6.0));
  auto fit = boundary_asymptote_fit(d, sp, {1, 0, 0}, ds);
  o.check(std::abs(fit.exponent - 3.0) <= 0.3, "exponent=" + num(fit.exponent, 4) + " (3+-0.3)");
  o.check(rel(fit.prefactor_free, fit.predicted) <= 0.25,
          "prefactor=" + num(fit.prefactor_free, 5) + " predicted 8pi(dphi)^2=" + num(fit.predicted, 5) +
              " rel=" + num(rel(fit.prefactor_free, fit.predicted), 3) + " (<=0.25)");
  o.detail << "pinned-exponent prefactor=" << num(fit.prefactor_pinned, 5) << "; ";
  // not gating: the same fit closer to the boundary
  auto near = boundary_asymptote_fit(d, sp, {1, 0, 0}, {0.005, 0.0075, 0.01, 0.015, 0.02});
  o.detail << "info d in [0.005,0.02]: exponent=" << num(near.exponent, 4)
           << " pinned prefactor=" << num(near.prefactor_pinned, 5) << "; ";
}

struct KernelSetup {
  DiscreteDomain d = radial_ball(1024);
  Spectrum sp = eigenpairs(d, 200, 1e-8);
  NonlocalKernel k{d, sp, kPi2 / 4, {0, 0, 0}};
};

// 6. small-tau constant and agreement of the two evaluation routes
void c6_small_tau(Outcome& o) {
  KernelSetup s;
  const double ts = s.k.tau_switch();
  auto fit = fit_small_tau(s.k, std::min(1e-6, 1e-3 * ts), std::min(1e-4, 0.1 * ts));
  const double target = kAlpha3 / (4.0 * std::sqrt(kPi));
  o.check(rel(fit.c1, target) <= 0.05, "sqrt(tau) I -> " + num(fit.c1, 7) + " target alpha3/(4 sqrt(pi))=" +
                                           num(target, 7) + " rel=" + num(rel(fit.c1, target), 3) + " (<=0.05)");
  o.detail << "ratio to target=" << num(fit.c1 / target, 5) << "; ";
  o.check(s.k.switch_mismatch() <= 0.01,
          "switch tau=" + num(ts, 4) + " mismatch=" + num(s.k.switch_mismatch(), 3) + " (<=0.01)");
}

// 7. I(tau) e^{lambda_1 tau} -> c_3 phi_1(0)^2 / (lambda_1 - gamma)
void c7_large_tau(Outcome& o) {
  KernelSetup s;
  const double tau = std::log(100.0) / (s.k.lambda2() - s.k.lambda1());
  const double phi0 = s.sp.value(s.d, 0, {0, 0, 0});
  const double coef = kC3 * phi0 * phi0 / (s.k.lambda1() - s.k.gamma());
  double worst = 0.0;
  for (double t : {tau, 1.5 * tau, 2.0 * tau}) worst = std::max(worst, rel(s.k.I(t) * std::exp(s.k.lambda1() * t), coef));
  o.check(worst <= 0.03, "tau>=" + num(tau, 4) + " max rel=" + num(worst, 3) + " (<=0.03)");
}

// 8. nonlocal round trip and the time-stepped PDE oracle
void c8_round_trip(Outcome& o) {
  KernelSetup s;
  const double l1 = 2.0 / 3.0, t0 = 1.0, t_end = 6.0, dt = 1.0 / 128, cmp = 5.0;
  auto rt = nonlocal_round_trip(s.k, l1, t0, t_end, dt, cmp);
  o.check(rt.rel_error <= 0.02, "round trip weighted rel=" + num(rt.rel_error, 3) + " (<=0.02)");
  o.detail << "extension-variant rel=" << num(rt.rel_error_ext, 3) << "; ";
  auto pde = forward_map_pde(s.d, s.sp, s.k.gamma(), {0, 0, 0}, rt.lambda_dot);
  double worst = 0.0;
  for (size_t i = 0; i < pde.size(); ++i)
    if (pde.t(i) >= t0 && pde.t(i) <= cmp) worst = std::max(worst, rel(pde.v[i], rt.forward.v[i]));
  o.check(worst <= 0.02, "forward vs PDE oracle max rel=" + num(worst, 3) + " (<=0.02)");
}

// 9. M-orthogonality with the computed translation coefficients and the phi_3 corrector
void c9_orthogonality(Outcome& o) {
  auto d = radial_ball(1024);
  auto sp = eigenpairs(d, 2, 1e-10);
  const Point q{0.3, 0, 0};
  const double g = gamma_star(d, sp, q, 1e-12).value;
  const Point gr = grad_robin(d, sp, g, q);
  const double mu0 = 0.1;
  auto xc = xi0_coefficients(gr, g);
  auto res = check_orthogonality_M(xc.c, g, mu0, gr);
  double worst = 0.0;
  for (double r : res) worst = std::max(worst, r);
  o.check(worst <= 1e-6, "max |int M Z_i| normalized=" + num(worst, 3) + " (<=1e-6)");
  auto rep = phi3_radial_mode(mode_profile(xc.c[0], g, mu0, gr[0]));
  o.check(std::isfinite(rep.sup_phi), "sup|phi3|=" + num(rep.sup_phi, 4));
  o.check(std::abs(rep.exponent_zero - 4.0) <= 0.2, "I exponent near 0=" + num(rep.exponent_zero, 4) + " (4+-0.2)");
  o.check(std::abs(rep.exponent_inf + 1.0) <= 0.2, "I exponent at inf=" + num(rep.exponent_inf, 4) + " (-1+-0.2)");
}

// 10. error hierarchy at the center of the ball
void c10_hierarchy(Outcome& o) {
  const double gs = kPi2 / 4;
  auto center_error = [](double g, double mu) {
    auto H = make_ball_regular_part(g, {0, 0, 0});
    return std::abs(error_u1(*H, {mu, {0, 0, 0}, g}, 0.0, {0, 0, 0}, {0, 0, 0}).total());
  };
  const double ratio = center_error(0.6 * gs, 1e-2) / center_error(gs, 1e-2);
  o.check(ratio >= 10.0, "|S| ratio generic/critical at mu=1e-2: " + num(ratio, 4) + " (>=10)");
  auto slope = [&](double g) {
    const std::vector<double> mus{1e-2, 1e-3, 1e-4};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double mu : mus) {
      double x = std::log(mu), y = std::log(center_error(g, mu));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  };
  const double sc = slope(gs), sg = slope(0.6 * gs);
  o.check(std::abs(sc + 0.5) <= 0.2, "exponent at gamma*=" + num(sc, 4) + " (-0.5+-0.2)");
  o.check(std::abs(sg + 1.5) <= 0.2, "exponent at 0.6 gamma*=" + num(sg, 4) + " (-1.5+-0.2)");
}

// 11. blow-up rate along the threshold solution, energy monotonicity, Kaplan dichotomy
void c11_dynamics(Outcome& o) {
  auto d = radial_ball(1024);
  auto sp = eigenpairs(d, 2, 1e-10);
  Eigen::VectorXd phi = sp.fields.col(0);
  if (phi.sum() < 0) phi = -phi;
  EvolveConfig cfg;
  cfg.energy_guard = false;
  cfg.horizon = 5.0;
  auto kr = kaplan_dichotomy(d, phi, sp.lambda1(), {0.01, 0.5, 1.0, 2.0, 3.0, 5.0}, cfg, 4);
  const auto& lo = kr.entries.front();
  const auto& hi = kr.entries.back();
  o.check(lo.status == Status::Decayed && rel(lo.decay_rate, sp.lambda1()) <= 0.05,
          "alpha=0.01 " + to_string(lo.status) + " rate=" + num(lo.decay_rate, 6) + " lambda1=" +
              num(sp.lambda1(), 6));
  o.check(hi.status == Status::BlownUp, "alpha=5 " + to_string(hi.status) + " T=" + num(hi.blowup_time, 4));
  o.check(kr.monotone, std::string("monotone=") + (kr.monotone ? "true" : "false"));
  int viol = 0;
  for (const auto& e : kr.entries) viol += e.energy_violations;

  const double g = kPi2 / 4;
  auto H = make_ball_regular_part(g, {0, 0, 0});
  BubbleParams p{0.05, {0, 0, 0}, g};
  // the bubble core needs N >= 2048 here; at 1024 the edge collapses spuriously near t = 0.095
  auto de = radial_ball(2048);
  Eigen::VectorXd u(de.size());
  for (int i = 0; i < de.size(); ++i) u[i] = u1(*H, p, de.nodes()[i]);
  EdgeOptions eo;
  eo.t_end = 0.2;
  auto th = track_threshold(de, u, 0.5, 1.5, cfg, eo);
  const auto& tr = th.edge;
  viol += tr.energy_violations;
  auto w = edge_window(tr);
  try {
    auto r = rate_estimate(tr, w.first, w.second);
    o.check(r.drop >= 3.0, "window [" + num(w.first, 4) + "," + num(w.second, 4) + "] mu drop=" + num(r.drop, 4) +
                               " (>=3)");
    o.check(rel(r.slope, kPi2 / 2) <= 0.15, "slope ln(1/mu)=" + num(r.slope, 5) + " +-" + num(r.ci95, 2) +
                                                 " target pi^2/2=" + num(kPi2 / 2, 5) + " (15%)");
  } catch (const ConfigError& e) {
    o.check(false, std::string("rate fit: ") + e.what());
  }
  o.detail << "edge stages=" << th.stages << " trials=" << th.trials << "; ";
  o.check(viol == 0, "energy increases at accepted steps=" + std::to_string(viol));
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "eigenvalues", c1_eigenvalues},       {2, "robin-closed-form", c2_robin},
      {3, "gamma-star-center", c3_gamma_star},  {4, "near-lambda1-coefficient", c4_near_lambda1},
      {5, "boundary-asymptote", c5_boundary},   {6, "kernel-small-tau", c6_small_tau},
      {7, "kernel-large-tau", c7_large_tau},    {8, "nonlocal-round-trip", c8_round_trip},
      {9, "orthogonality-corrector", c9_orthogonality}, {10, "error-hierarchy", c10_hierarchy},
      {11, "dynamics", c11_dynamics}};
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (only && c.id != only) continue;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-26s %s  (%.1fs)  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.str().c_str());
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
