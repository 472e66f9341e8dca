#include "critheat/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "critheat/ansatz.hpp"

namespace critheat {

std::string to_string(Scheme s) { return s == Scheme::StrangSplit ? "strang-split" : "imex-bdf2"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "strang-split") return Scheme::StrangSplit;
  if (s == "imex-bdf2") return Scheme::ImexBdf2;
  throw ConfigError("unknown scheme '" + s + "' (expected strang-split or imex-bdf2)");
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::Decayed: return "decayed";
    case Status::BlownUp: return "blown-up";
    case Status::Horizon: return "horizon";
  }
  return "?";
}

void EvolveConfig::validate() const {
  if (!(dt0 > 0.0) || !(dt_min > 0.0) || dt_min > dt0) throw ConfigError("evolve: need 0 < dt_min <= dt0");
  if (!(rel_change > 0.0)) throw ConfigError("evolve: rel_change must be positive");
  if (!(safety > 0.0 && safety < 0.5)) throw ConfigError("evolve: safety must lie in (0, 0.5)");
  if (m_max < 0.0) throw ConfigError("evolve: m_max must be >= 0");
  if (!(decay_ratio > 0.0 && decay_ratio < 1.0)) throw ConfigError("evolve: decay_ratio must lie in (0, 1)");
  if (!(horizon > 0.0)) throw ConfigError("evolve: horizon must be positive");
  if (record_every < 1) throw ConfigError("evolve: record_every must be >= 1");
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,sup_norm,mu_hat,xi_x,xi_y,xi_z,energy,dt\n";
  for (size_t i = 0; i < t.size(); ++i)
    os << t[i] << ',' << sup[i] << ',' << mu_hat[i] << ',' << xi[i][0] << ',' << xi[i][1] << ',' << xi[i][2] << ','
       << energy[i] << ',' << dt[i] << '\n';
  return os.str();
}

bool ode_flow(Eigen::VectorXd& u, double tau) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double u2 = u[i] * u[i];
    double s = 1.0 - 4.0 * tau * u2 * u2;
    if (!(s > 0.0)) return false;
    u[i] /= std::sqrt(std::sqrt(s));
  }
  return true;
}

Integrator::Integrator(const DiscreteDomain& dom, Scheme scheme) : dom_(dom), scheme_(scheme) {}
Integrator::~Integrator() = default;

void Integrator::reset() {
  prev_dt_ = 0.0;
  prev_u_.resize(0);
  prev_f_.resize(0);
}

const ShiftedSolver& Integrator::solver(double shift) {
  auto it = cache_.find(shift);
  if (it == cache_.end()) it = cache_.emplace(shift, std::make_unique<ShiftedSolver>(dom_, shift)).first;
  return *it->second;
}

Eigen::VectorXd Integrator::step(const Eigen::VectorXd& u, double dt) {
  const Eigen::VectorXd& W = dom_.weights();
  if (scheme_ == Scheme::StrangSplit) {
    Eigen::VectorXd v = u;
    if (!ode_flow(v, 0.5 * dt)) throw NumericalError("nonlinear substep left the real line", dt);
    // backward Euler (W + dt K) v' = W v
    v = solver(1.0 / dt).solve((W.array() * v.array()).matrix() / dt);
    if (!ode_flow(v, 0.5 * dt)) throw NumericalError("nonlinear substep left the real line", dt);
    return v;
  }
  Eigen::VectorXd f = u.array().pow(5).matrix();
  Eigen::VectorXd out;
  if (prev_dt_ == dt && prev_u_.size() == u.size()) {
    // (3 u' - 4 u + u_prev) / (2 dt) = -A u' + 2 f - f_prev
    Eigen::VectorXd rhs = (4.0 * u - prev_u_) / (2.0 * dt) + 2.0 * f - prev_f_;
    out = solver(1.5 / dt).solve((W.array() * rhs.array()).matrix());
  } else {
    Eigen::VectorXd rhs = u / dt + f;
    out = solver(1.0 / dt).solve((W.array() * rhs.array()).matrix());
  }
  prev_u_ = u;
  prev_f_ = f;
  prev_dt_ = dt;
  return out;
}

namespace {

enum class StepOutcome { Accepted, Underflow };

// One accepted step of the controller: dt from the ladder, nonlinear stability bound, relative change and
// (optionally) energy monotonicity; rejected trials halve dt.
struct Controller {
  Integrator& integ;
  const EvolveConfig& cfg;
  int level = 0;
  long rejected = 0;
  int energy_violations = 0;
  double max_energy_increase = 0.0;
  double last_dt = 0.0, last_change = 0.0;

  StepOutcome step(Eigen::VectorXd& u, double& t, double& E, double sup, double t_limit) {
    const double s4 = std::pow(sup, 4);
    while (true) {
      double dt = std::ldexp(cfg.dt0, -level);
      while (s4 * dt > cfg.safety && dt >= cfg.dt_min) dt = std::ldexp(cfg.dt0, -(++level));
      if (dt < cfg.dt_min) return StepOutcome::Underflow;
      dt = std::min(dt, t_limit - t);
      Eigen::VectorXd v;
      bool ok = true;
      try {
        v = integ.step(u, dt);
      } catch (const NumericalError&) {
        ok = false;
      }
      if (ok && !v.allFinite()) throw NumericalError("non-finite field without crossing the blow-up threshold", t);
      double change = ok ? (v - u).cwiseAbs().maxCoeff() / sup : std::numeric_limits<double>::infinity();
      double En = ok ? energy(integ.domain(), v) : 0.0;
      bool energy_up = ok && En > E + cfg.energy_tol * std::max(1.0, std::abs(E));
      if (!ok || change > cfg.rel_change || (cfg.energy_guard && energy_up)) {
        integ.reset();
        if (std::ldexp(cfg.dt0, -(level + 1)) >= cfg.dt_min) {
          ++level;
          ++rejected;
          continue;
        }
        if (!ok || change > cfg.rel_change) return StepOutcome::Underflow;
      }
      if (energy_up) {
        ++energy_violations;
        max_energy_increase = std::max(max_energy_increase, En - E);
      }
      u.swap(v);
      t += dt;
      E = En;
      last_dt = dt;
      last_change = change;
      double ns = u.cwiseAbs().maxCoeff();
      // grow after comfortably small changes; bdf2 restarts on any change of dt
      if (change < 0.25 * cfg.rel_change && level > 0 && std::pow(ns, 4) * 2.0 * dt <= cfg.safety) {
        --level;
        integ.reset();
      }
      return StepOutcome::Accepted;
    }
  }
};

struct Sample {
  double sup;
  int arg;
};

Sample sup_norm(const Eigen::VectorXd& u) {
  Eigen::Index i = 0;
  double s = u.cwiseAbs().maxCoeff(&i);
  return {s, static_cast<int>(i)};
}

void record_state(Trajectory& tr, const DiscreteDomain& dom, double t, const Sample& s, double E, double dt) {
  tr.t.push_back(t);
  tr.sup.push_back(s.sup);
  tr.mu_hat.push_back(std::pow(kAlpha3 / s.sup, 2));
  tr.xi.push_back(dom.nodes()[s.arg]);
  tr.energy.push_back(E);
  tr.dt.push_back(dt);
}

}  // namespace

Trajectory evolve(const DiscreteDomain& dom, const Eigen::VectorXd& u0, const EvolveConfig& cfg) {
  cfg.validate();
  if (u0.size() != dom.size()) throw ConfigError("initial datum has the wrong size");
  if (!u0.allFinite()) throw ConfigError("initial datum is not finite");
  Trajectory tr;
  const Sample s0 = sup_norm(u0);
  if (s0.sup == 0.0) {
    tr.status = Status::Decayed;
    tr.u_final = u0;
    tr.message = "zero datum";
    return tr;
  }
  const double m_max = cfg.m_max > 0.0 ? cfg.m_max : 10.0 * s0.sup;
  if (m_max < 10.0 * s0.sup * (1.0 - 1e-12)) throw ConfigError("m_max must be at least 10 sup |u_0|");

  Integrator integ(dom, cfg.scheme);
  Controller ctl{integ, cfg};
  Eigen::VectorXd u = u0;
  double t = 0.0, E = energy(dom, u);
  Sample s = s0;
  record_state(tr, dom, t, s, E, cfg.dt0);
  while (true) {
    if (t >= cfg.horizon * (1.0 - 1e-14)) {
      // growth over the last quarter decides between running and a stalled horizon
      size_t j = tr.t.size() - 1;
      while (j > 0 && tr.t[j] > 0.75 * t) --j;
      tr.status = s.sup > tr.sup[j] * (1.0 + 1e-6) ? Status::Running : Status::Horizon;
      break;
    }
    if (tr.steps + ctl.rejected >= cfg.max_steps) {
      tr.status = Status::Horizon;
      tr.message = "step budget exhausted";
      break;
    }
    if (ctl.step(u, t, E, s.sup, cfg.horizon) == StepOutcome::Underflow) {
      tr.status = Status::BlownUp;
      tr.blowup_time = t + 1.0 / (4.0 * std::pow(s.sup, 4));
      tr.message = "dt underflow below dt_min";
      break;
    }
    s = sup_norm(u);
    ++tr.steps;
    bool done = false;
    if (s.sup >= m_max) {
      tr.status = Status::BlownUp;
      tr.blowup_time = t + 1.0 / (4.0 * std::pow(s.sup, 4));
      done = true;
    } else if (s.sup <= cfg.decay_ratio * s0.sup) {
      tr.status = Status::Decayed;
      done = true;
    }
    if (done || tr.steps % cfg.record_every == 0) record_state(tr, dom, t, s, E, ctl.last_dt);
    if (done) break;
  }
  if (tr.t.back() != t) record_state(tr, dom, t, s, E, ctl.last_dt);
  tr.t_end = t;
  tr.rejected = ctl.rejected;
  tr.energy_violations = ctl.energy_violations;
  tr.max_energy_increase = ctl.max_energy_increase;
  tr.u_final = u;
  return tr;
}

namespace {

RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  RateFit r;
  r.samples = n;
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  r.slope = sxy / sxx;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    double e = y[i] - my - r.slope * (x[i] - mx);
    ss += e * e;
  }
  r.stderr_ = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  r.ci95 = 1.96 * r.stderr_;
  return r;
}

}  // namespace

RateFit rate_estimate(const Trajectory& tr, double t_lo, double t_hi) {
  std::vector<double> x, y;
  for (size_t i = 0; i < tr.t.size(); ++i)
    if (tr.t[i] >= t_lo && tr.t[i] <= t_hi) x.push_back(tr.t[i]), y.push_back(std::log(1.0 / tr.mu_hat[i]));
  if (x.size() < 8) throw ConfigError("rate window too short (fewer than 8 samples)");
  double drop = std::exp(y.back() - y.front());
  if (drop < 2.0) throw ConfigError("rate window too short: mu_hat drops by less than a factor 2");
  RateFit r = fit_line(x, y);
  r.drop = drop;
  return r;
}

RateFit log_sup_slope(const Trajectory& tr, double t_lo, double t_hi) {
  std::vector<double> x, y;
  for (size_t i = 0; i < tr.t.size(); ++i)
    if (tr.t[i] >= t_lo && tr.t[i] <= t_hi) x.push_back(tr.t[i]), y.push_back(std::log(tr.sup[i]));
  if (x.size() < 3) throw ConfigError("window too short (fewer than 3 samples)");
  RateFit r = fit_line(x, y);
  r.drop = std::exp(y.front() - y.back());
  return r;
}

KaplanResult kaplan_dichotomy(const DiscreteDomain& dom, const Eigen::VectorXd& phi, double lambda1,
                              const std::vector<double>& alphas, const EvolveConfig& cfg, int jobs) {
  if (phi.size() != dom.size()) throw ConfigError("profile has the wrong size");
  if (phi.minCoeff() < 0.0 || phi.maxCoeff() <= 0.0) throw ConfigError("Kaplan profile must be nonnegative and nonzero");
  if (alphas.empty()) throw ConfigError("empty alpha list");
  KaplanResult res;
  res.kaplan_threshold = std::pow(lambda1, 0.25);
  const double mass = dom.integrate(phi);
  auto run = [&](double a) {
    KaplanEntry e;
    e.alpha = a;
    e.kaplan_y0 = a * dom.inner(phi, phi) / mass;
    e.kaplan_guaranteed = e.kaplan_y0 > res.kaplan_threshold;
    Trajectory tr = evolve(dom, a * phi, cfg);
    e.status = tr.status;
    e.t_end = tr.t_end;
    e.blowup_time = tr.blowup_time;
    e.energy_violations = tr.energy_violations;
    if (tr.status == Status::Decayed && tr.t.size() >= 6) e.decay_rate = -log_sup_slope(tr, 0.5 * tr.t_end, tr.t_end).slope;
    return e;
  };
  std::vector<double> order = alphas;
  std::sort(order.begin(), order.end());
  res.entries.resize(order.size());
  const int J = std::max(1, jobs);
  for (size_t start = 0; start < order.size(); start += J) {
    std::vector<std::future<KaplanEntry>> fut;
    for (size_t i = start; i < std::min(order.size(), start + J); ++i)
      fut.push_back(std::async(J > 1 ? std::launch::async : std::launch::deferred, run, order[i]));
    for (size_t i = 0; i < fut.size(); ++i) res.entries[start + i] = fut[i].get();
  }
  bool seen_blow = false;
  for (size_t i = 0; i < res.entries.size(); ++i) {
    const auto& e = res.entries[i];
    if (e.status == Status::BlownUp) seen_blow = true;
    if (seen_blow && e.status == Status::Decayed) res.monotone = false;
    if (i > 0 && res.entries[i - 1].status == Status::Decayed && e.status == Status::BlownUp && !res.bracket)
      res.bracket = std::make_pair(res.entries[i - 1].alpha, e.alpha);
  }
  return res;
}

ThresholdResult track_threshold(const DiscreteDomain& dom, const Eigen::VectorXd& profile, double alpha_decay,
                                double alpha_blow, const EvolveConfig& cfg, const EdgeOptions& eo) {
  cfg.validate();
  if (!(alpha_decay < alpha_blow)) throw ConfigError("threshold bracket must satisfy alpha_decay < alpha_blow");
  if (!(eo.up > 1.0) || !(eo.down > 0.0 && eo.down < 1.0)) throw ConfigError("edge: need up > 1 and 0 < down < 1");
  if (!(eo.bisect_tol > 0.0) || !(eo.separation > eo.bisect_tol)) throw ConfigError("edge: need 0 < bisect_tol < separation");
  if (profile.size() != dom.size()) throw ConfigError("profile has the wrong size");
  ThresholdResult res;

  // true when the state decays (sup falls by `down`) before it grows by `up`
  auto decays = [&](const Eigen::VectorXd& u0, double t0) {
    Integrator integ(dom, cfg.scheme);
    Controller ctl{integ, cfg};
    Eigen::VectorXd u = u0;
    double t = t0, E = energy(dom, u);
    const double s0 = u.cwiseAbs().maxCoeff();
    double s = s0;
    ++res.trials;
    while (t < t0 + eo.trial_horizon) {
      if (ctl.step(u, t, E, s, t0 + eo.trial_horizon) == StepOutcome::Underflow) return false;
      s = u.cwiseAbs().maxCoeff();
      if (s >= eo.up * s0) return false;
      if (s <= eo.down * s0) return true;
    }
    throw NumericalError("edge tracking: trial undecided within the trial horizon", t);
  };
  auto bisect = [&](Eigen::VectorXd& lo, Eigen::VectorXd& hi, double t) {
    int n = 0;
    while ((hi - lo).cwiseAbs().maxCoeff() > eo.bisect_tol * lo.cwiseAbs().maxCoeff()) {
      if (++n > eo.max_bisections) throw NumericalError("edge tracking: bisection did not converge", t);
      Eigen::VectorXd mid = 0.5 * (lo + hi);
      if (decays(mid, t)) lo.swap(mid);
      else hi.swap(mid);
    }
    res.bisections += n;
  };

  Eigen::VectorXd lo = alpha_decay * profile, hi = alpha_blow * profile;
  if (!decays(lo, 0.0)) throw ConfigError("lower amplitude does not decay");
  if (decays(hi, 0.0)) throw ConfigError("upper amplitude does not blow up");
  double t = 0.0;
  bisect(lo, hi, t);
  const double p2 = profile.squaredNorm();
  res.alpha_decay = lo.dot(profile) / p2;
  res.alpha_blow = hi.dot(profile) / p2;

  Integrator ia(dom, cfg.scheme), ib(dom, cfg.scheme);
  Controller ctl{ia, cfg};
  double E = energy(dom, lo);
  Trajectory& tr = res.edge;
  record_state(tr, dom, t, sup_norm(lo), E, cfg.dt0);
  while (t < eo.t_end * (1.0 - 1e-14)) {
    if (res.stages >= eo.max_stages) {
      tr.message = "stage budget exhausted";
      break;
    }
    ++res.stages;
    ia.reset();
    ib.reset();
    const double stage_sup = lo.cwiseAbs().maxCoeff();
    while (t < eo.t_end * (1.0 - 1e-14)) {
      const double sa = lo.cwiseAbs().maxCoeff();
      if (sa < eo.down * stage_sup || sa > eo.up * stage_sup)
        throw NumericalError("edge tracking: bracketing pair left the edge together", t);
      Eigen::VectorXd a = lo;
      double ta = t, Ea = E;
      if (ctl.step(a, ta, Ea, sa, eo.t_end) == StepOutcome::Underflow)
        throw NumericalError("edge tracking: step underflow on the edge", t);
      Eigen::VectorXd b;
      try {
        b = ib.step(hi, ctl.last_dt);
      } catch (const NumericalError&) {
        break;
      }
      lo.swap(a);
      hi.swap(b);
      t = ta;
      E = Ea;
      ++tr.steps;
      if (tr.steps % cfg.record_every == 0) record_state(tr, dom, t, sup_norm(lo), E, ctl.last_dt);
      if ((hi - lo).cwiseAbs().maxCoeff() > eo.separation * lo.cwiseAbs().maxCoeff()) break;
    }
    if (t < eo.t_end * (1.0 - 1e-14)) {
      bisect(lo, hi, t);
      E = energy(dom, lo);
    }
    if (eo.progress) eo.progress(res.stages, t, tr.mu_hat.back(), res.trials);
  }
  if (tr.t.back() != t) record_state(tr, dom, t, sup_norm(lo), E, ctl.last_dt);
  tr.t_end = t;
  tr.status = Status::Running;
  tr.rejected = ctl.rejected;
  tr.energy_violations = ctl.energy_violations;
  tr.max_energy_increase = ctl.max_energy_increase;
  tr.u_final = lo;
  return res;
}

std::pair<double, double> edge_window(const Trajectory& tr, double start_frac, double trim) {
  if (tr.t.size() < 3) throw ConfigError("trajectory too short for an edge window");
  size_t imin = 0;
  for (size_t i = 1; i < tr.mu_hat.size(); ++i)
    if (tr.mu_hat[i] < tr.mu_hat[imin]) imin = i;
  size_t i0 = 0;
  while (i0 < imin && tr.mu_hat[i0] > start_frac * tr.mu_hat[0]) ++i0;
  double a = tr.t[i0], b = tr.t[imin];
  return {a, b - trim * (b - a)};
}

LinearTrajectory linear_inhomogeneous(const DiscreteDomain& dom, double lambda1, double gamma,
                                      const std::function<Eigen::VectorXd(double)>& f, const LinearConfig& cfg) {
  if (!(gamma < lambda1)) throw ConfigError("linear_inhomogeneous: gamma >= lambda_1 is exponentially unstable");
  if (!(cfg.dt > 0.0) || !(cfg.t_end > cfg.t0)) throw ConfigError("linear_inhomogeneous: need dt > 0 and t_end > t0");
  if (cfg.record_every < 1) throw ConfigError("linear_inhomogeneous: record_every must be >= 1");
  for (const auto& p : cfg.probes)
    if (!dom.contains(p)) throw ConfigError("probe outside the domain");
  const Eigen::VectorXd& W = dom.weights();
  const double dt = cfg.dt;
  const long n = std::lround((cfg.t_end - cfg.t0) / dt);
  ShiftedSolver be(dom, 1.0 / dt - gamma), bdf(dom, 1.5 / dt - gamma);
  LinearTrajectory out;
  out.probe.resize(cfg.probes.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dom.size()), prev = v;
  auto record = [&](double t) {
    out.t.push_back(t);
    out.sup.push_back(v.cwiseAbs().maxCoeff());
    for (size_t j = 0; j < cfg.probes.size(); ++j) out.probe[j].push_back(dom.interpolate(v, cfg.probes[j]));
  };
  record(cfg.t0);
  for (long i = 1; i <= n; ++i) {
    double t = cfg.t0 + i * dt;
    Eigen::VectorXd fn = f(t);
    if (fn.size() != dom.size()) throw ConfigError("source has the wrong size");
    Eigen::VectorXd next;
    if (i == 1) {
      next = be.solve((W.array() * (v / dt + fn).array()).matrix());
    } else {
      Eigen::VectorXd rhs = (4.0 * v - prev) / (2.0 * dt) + fn;
      next = bdf.solve((W.array() * rhs.array()).matrix());
    }
    prev.swap(v);
    v.swap(next);
    if (!v.allFinite()) throw NumericalError("linear solve produced non-finite values", t);
    if (i % cfg.record_every == 0 || i == n) record(t);
  }
  out.v_final = v;
  return out;
}

Eigen::VectorXd green_field(const DiscreteDomain& dom, const GreenData& g) {
  const int n = dom.size();
  Eigen::VectorXd G(n);
  const int qi = dom.nearest_node(g.source);
  const bool on_node = norm(dom.nodes()[qi] - g.source) < 1e-12 * dom.h();
  std::optional<BallGreenSeries> series;
  if (g.series) series.emplace(g.gamma, dom.spec().effective_radius());
  const bool center = g.series && norm(g.source) == 0.0;
  for (int i = 0; i < n; ++i) {
    const Point& x = dom.nodes()[i];
    double r = norm(x - g.source);
    double H;
    if (center) H = ball_regular_part_center(g.gamma, r);
    else if (g.series) H = series->H(x, g.source);
    else H = g.H[i];
    double sing;
    if (i == qi && on_node) {
      // cell averages of 1/r: ball of radius h/2 (radial) or the cube of side h
      sing = dom.mode() == Mode::Radial ? 3.0 * kAlpha3 / dom.h() : kAlpha3 * 2.3800772603845 / dom.h();
    } else {
      sing = kAlpha3 / r;
    }
    G[i] = sing - H;
  }
  return G;
}

TimeSeries forward_map_pde(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q,
                           const TimeSeries& lambda_dot, int substeps) {
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  const GreenData gd = regular_part(dom, sp, gamma, q);
  const Eigen::VectorXd G = green_field(dom, gd);
  const size_t m = lambda_dot.size();
  if (m < 2) throw ConfigError("forward map needs at least two samples");
  auto ld = [&](double t) {
    double s = (t - lambda_dot.t0) / lambda_dot.dt;
    size_t i = std::min(m - 2, static_cast<size_t>(std::max(0.0, std::floor(s))));
    double w = s - static_cast<double>(i);
    return (1.0 - w) * lambda_dot.v[i] + w * lambda_dot.v[i + 1];
  };
  LinearConfig lc;
  lc.t0 = lambda_dot.t0;
  lc.dt = lambda_dot.dt / substeps;
  lc.t_end = lambda_dot.t(m - 1);
  lc.probes = {q};
  lc.record_every = substeps;
  auto tr = linear_inhomogeneous(dom, sp.lambda1(), gamma, [&](double t) -> Eigen::VectorXd { return -ld(t) * G; }, lc);
  TimeSeries out{lambda_dot.t0, lambda_dot.dt, tr.probe[0]};
  out.v.resize(m);
  return out;
}

}  // namespace critheat
