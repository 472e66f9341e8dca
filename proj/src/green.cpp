#include "critheat/green.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

namespace critheat {

double theta_gamma(double gamma, double r) {
  const double k = std::sqrt(gamma), kr = k * r;
  if (kr < 1e-4) return kAlpha3 * (0.5 * k * kr - kr * kr * kr * k / 24.0);
  return kAlpha3 * (1.0 - std::cos(kr)) / r;
}

namespace {

double theta_prime(double gamma, double r) {
  const double k = std::sqrt(gamma), kr = k * r;
  if (kr < 1e-4) return kAlpha3 * (0.5 * gamma - gamma * kr * kr / 8.0);
  return kAlpha3 * (k * std::sin(kr) / r - (1.0 - std::cos(kr)) / (r * r));
}

// S_l(x) = 0F1(; l + 3/2; -x^2/4), so that j_l(x) = x^l S_l(x) / (2l+1)!!
double s_series(int l, double x) {
  const double z = -0.5 * x * x;
  double term = 1.0, sum = 1.0;
  for (int m = 1; m < 400; ++m) {
    term *= z / (m * (2.0 * l + 2.0 * m + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double ball_robin_center(double gamma) {
  if (gamma == 0.0) return kAlpha3;
  const double k = std::sqrt(gamma);
  return kAlpha3 * k / std::tan(k);
}

double ball_regular_part_center(double gamma, double r) {
  const double k = std::sqrt(gamma);
  if (r == 0.0) return ball_robin_center(gamma);
  if (gamma == 0.0) return kAlpha3;
  return kAlpha3 * ((1.0 - std::cos(k * r)) / r + std::sin(k * r) / (r * std::tan(k)));
}

BallGreenSeries::BallGreenSeries(double gamma, double radius) : gamma_(gamma), radius_(radius) {}

double BallGreenSeries::h_unit(const Point& x, const Point& y, double g) const {
  // boundary data -alpha_3 cos(k s)/s = sum_l alpha_3 rho^l S_l(k rho) Y_l P_l(cos psi)
  const double k = std::sqrt(g);
  const double r = norm(x), rho = norm(y);
  const double c = (r > 0 && rho > 0) ? std::clamp(dot(x, y) / (r * rho), -1.0, 1.0) : 1.0;
  const double rr = r * rho;
  int L = 2;
  if (rr > 0) L = std::max(2, static_cast<int>(std::ceil(std::log(1e-17) / std::log(std::min(rr, 0.9999999)))) + 4);
  L = std::min(L, 20000);
  double ym1 = -std::cos(k), y0 = -std::cos(k) - k * std::sin(k);
  double sum = 0.0;
  double pm1 = 1.0, p0 = c;  // Legendre recurrence
  double pw = 1.0;           // (r rho)^l
  for (int l = 0; l <= L; ++l) {
    double Yl, Pl;
    if (l == 0) {
      Yl = ym1, Pl = 1.0;
    } else if (l == 1) {
      Yl = y0, Pl = c;
    } else {
      double yn = y0 - ym1 * g / ((2.0 * l - 1.0) * (2.0 * l - 3.0));
      ym1 = y0, y0 = yn, Yl = yn;
      double pn = ((2.0 * l - 1.0) * c * p0 - (l - 1.0) * pm1) / l;
      pm1 = p0, p0 = pn, Pl = pn;
    }
    double term = pw * s_series(l, k * rho) * s_series(l, k * r) * Yl / s_series(l, k) * Pl;
    sum += term;
    if (rr == 0.0) break;
    pw *= rr;
    if (pw < 1e-300) break;
  }
  return kAlpha3 * sum;
}

double BallGreenSeries::H(const Point& x, const Point& y) const {
  // scaling: H^{B_R}_gamma(x, y) = H^{B_1}_{gamma R^2}(x/R, y/R) / R
  const double R = radius_;
  Point xs = (1.0 / R) * x, ys = (1.0 / R) * y;
  double g = gamma_ * R * R;
  double th = theta_gamma(g, norm(xs - ys));
  return (th - h_unit(xs, ys, g)) / R;
}

double BallGreenSeries::robin(const Point& q) const { return H(q, q); }

bool uses_ball_series(const DiscreteDomain& dom, const Point& q) {
  return dom.mode() == Mode::Radial && norm(q) > 0.0;
}

double lambda1_for(const DiscreteDomain& dom, const Spectrum& sp, const Point& q) {
  if (uses_ball_series(dom, q)) return std::pow(kPi / dom.spec().effective_radius(), 2);
  return sp.lambda1();
}

namespace {

void check_gamma(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q, const GreenOptions& opt,
                 std::vector<std::string>* warnings) {
  const double l1 = lambda1_for(dom, sp, q);
  const double margin = uses_ball_series(dom, q) ? opt.series_margin_frac : opt.margin_frac;
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (gamma > (1.0 - margin) * l1)
    throw ConfigError("resonant: gamma = " + std::to_string(gamma) + " within margin of lambda_1 = " + std::to_string(l1));
  if (warnings)
    for (int k = 1; k < sp.count(); ++k)
      if (std::abs(gamma - sp.eigenvalues[k]) < opt.warn_frac * sp.eigenvalues[k])
        warnings->push_back("gamma close to lambda_" + std::to_string(k + 1) + ": conditioning degrades");
}

Eigen::VectorXd smooth_part(const DiscreteDomain& dom, const ShiftedSolver& solver, double gamma, const Point& y) {
  const double k = std::sqrt(gamma);
  auto g = [&](const Point& x) {
    double s = norm(x - y);
    return -kAlpha3 * std::cos(k * s) / s;
  };
  Eigen::VectorXd b = dom.lift(g);
  return solver.solve(dom.weights().cwiseProduct(b));
}

double robin_from_h(const DiscreteDomain& dom, const Eigen::VectorXd& h, const Point& y) {
  if (dom.mode() == Mode::Radial) return -h[0];
  return -dom.interpolate_quadratic(h, y);
}

void check_source(const DiscreteDomain& dom, const Point& y) {
  if (dom.mode() == Mode::Radial && norm(y) > 0.0)
    throw ConfigError("radial grid solves need the source at the center");
  double d = dom.boundary_distance(y);
  if (d < 2.0 * dom.h()) throw ConfigError("source closer than 2h to the boundary");
}

}  // namespace

GreenData regular_part(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& y,
                       const GreenOptions& opt) {
  GreenData gd;
  gd.gamma = gamma;
  gd.source = y;
  check_gamma(dom, sp, gamma, y, opt, &gd.warnings);
  if (uses_ball_series(dom, y)) {
    gd.series = true;
    gd.robin = BallGreenSeries(gamma, dom.spec().effective_radius()).robin(y);
    return gd;
  }
  check_source(dom, y);
  ShiftedSolver solver(dom, -gamma);
  gd.h = smooth_part(dom, solver, gamma, y);
  gd.H.resize(dom.size());
  for (int i = 0; i < dom.size(); ++i) gd.H[i] = theta_gamma(gamma, norm(dom.nodes()[i] - y)) - gd.h[i];
  gd.robin = robin_from_h(dom, gd.h, y);
  return gd;
}

double robin(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q, const GreenOptions& opt) {
  return regular_part(dom, sp, gamma, q, opt).robin;
}

namespace {

class GridRegularPart : public RegularPart {
 public:
  GridRegularPart(const DiscreteDomain& dom, double gamma, const Point& xi) : dom_(dom), gamma_(gamma), xi_(xi) {
    ShiftedSolver solver(dom, -gamma);
    h_ = smooth_part(dom, solver, gamma, xi);
    robin_ = robin_from_h(dom, h_, xi);
    delta_ = dom.h();
    for (int a = 0; a < 3; ++a) {
      Point e{0, 0, 0};
      e[a] = delta_;
      hp_[a] = smooth_part(dom, solver, gamma, xi + e);
      hm_[a] = smooth_part(dom, solver, gamma, xi - e);
    }
  }
  double gamma() const override { return gamma_; }
  Point source() const override { return xi_; }
  double robin() const override { return robin_; }
  double H(const Point& x) const override {
    return theta_gamma(gamma_, norm(x - xi_)) - dom_.interpolate(h_, x, data(xi_));
  }
  Point grad_source(const Point& x) const override {
    Point g;
    const double r = norm(x - xi_);
    for (int a = 0; a < 3; ++a) {
      Point e{0, 0, 0};
      e[a] = delta_;
      double dh = (dom_.interpolate(hp_[a], x, data(xi_ + e)) - dom_.interpolate(hm_[a], x, data(xi_ - e))) /
                  (2.0 * delta_);
      double dth = r > 0 ? -theta_prime(gamma_, r) * (x[a] - xi_[a]) / r : 0.0;
      g[a] = dth - dh;
    }
    return g;
  }

 private:
  std::function<double(const Point&)> data(const Point& y) const {
    const double k = std::sqrt(gamma_);
    return [k, y](const Point& x) {
      double s = norm(x - y);
      return -kAlpha3 * std::cos(k * s) / s;
    };
  }
  const DiscreteDomain& dom_;
  double gamma_;
  Point xi_;
  Eigen::VectorXd h_;
  std::array<Eigen::VectorXd, 3> hp_, hm_;
  double robin_ = 0.0, delta_ = 0.0;
};

class SeriesRegularPart : public RegularPart {
 public:
  SeriesRegularPart(double gamma, const Point& xi, double radius) : series_(gamma, radius), xi_(xi) {
    robin_ = series_.robin(xi);
  }
  double gamma() const override { return series_.gamma(); }
  Point source() const override { return xi_; }
  double robin() const override { return robin_; }
  double H(const Point& x) const override { return series_.H(x, xi_); }
  Point grad_source(const Point& x) const override {
    const double d = 1e-5;
    Point g;
    for (int a = 0; a < 3; ++a) {
      Point e{0, 0, 0};
      e[a] = d;
      g[a] = (series_.H(x, xi_ + e) - series_.H(x, xi_ - e)) / (2.0 * d);
    }
    return g;
  }

 private:
  BallGreenSeries series_;
  Point xi_;
  double robin_ = 0.0;
};

}  // namespace

std::unique_ptr<RegularPart> make_ball_regular_part(double gamma, const Point& xi, double radius) {
  return std::make_unique<SeriesRegularPart>(gamma, xi, radius);
}

std::unique_ptr<RegularPart> make_regular_part(const DiscreteDomain& dom, const Spectrum& sp, double gamma,
                                               const Point& xi, const GreenOptions& opt) {
  if (dom.mode() == Mode::Radial) {
    check_gamma(dom, sp, gamma, {1e-3, 0, 0}, opt, nullptr);
    return make_ball_regular_part(gamma, xi, dom.spec().effective_radius());
  }
  check_gamma(dom, sp, gamma, xi, opt, nullptr);
  check_source(dom, xi);
  return std::make_unique<GridRegularPart>(dom, gamma, xi);
}

RobinCurve robin_curve(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, const std::vector<double>& gammas,
                       const GreenOptions& opt) {
  RobinCurve c;
  c.q = q;
  c.gammas = gammas;
  for (double g : gammas) c.values.push_back(robin(dom, sp, g, q, opt));
  for (size_t i = 1; i < c.values.size(); ++i) {
    if (c.values[i] >= c.values[i - 1]) c.monotone = false;
    if (!c.root && c.values[i - 1] > 0 && c.values[i] <= 0) {
      double t = c.values[i - 1] / (c.values[i - 1] - c.values[i]);
      c.root = gammas[i - 1] + t * (gammas[i] - gammas[i - 1]);
    }
  }
  return c;
}

GammaStar gamma_star(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, double tol,
                     const GreenOptions& opt) {
  const double l1 = lambda1_for(dom, sp, q);
  const double margin = uses_ball_series(dom, q) ? opt.series_margin_frac : opt.margin_frac;
  GammaStar gs;
  gs.lo = std::max(margin, 1e-6) * l1;
  gs.hi = (1.0 - margin) * l1;
  double rlo = robin(dom, sp, gs.lo, q, opt), rhi = robin(dom, sp, gs.hi, q, opt);
  if (!(rlo > 0.0 && rhi < 0.0))
    throw NumericalError("Robin function does not change sign on the searchable range: R(" + std::to_string(gs.lo) +
                             ") = " + std::to_string(rlo) + ", R(" + std::to_string(gs.hi) +
                             ") = " + std::to_string(rhi),
                         rhi);
  while (gs.hi - gs.lo > tol * l1 && gs.iterations < 200) {
    double mid = 0.5 * (gs.lo + gs.hi);
    if (robin(dom, sp, mid, q, opt) > 0.0)
      gs.lo = mid;
    else
      gs.hi = mid;
    ++gs.iterations;
  }
  gs.value = 0.5 * (gs.lo + gs.hi);
  return gs;
}

Admissibility admissible(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, double tol,
                         const GreenOptions& opt) {
  Admissibility a;
  a.gamma_star = gamma_star(dom, sp, q, tol, opt).value;
  a.lambda1 = lambda1_for(dom, sp, q);
  a.margin = a.lambda1 - 3.0 * a.gamma_star;
  a.admissible = a.margin > 0.0;
  return a;
}

GammaStarMap gamma_star_map(const DiscreteDomain& dom, const Spectrum& sp, const std::vector<Point>& points,
                            double tol, int jobs, const GreenOptions& opt) {
  GammaStarMap map;
  map.entries.resize(points.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < points.size(); i = next++) {
      MapEntry& e = map.entries[i];
      e.q = points[i];
      try {
        Admissibility a = admissible(dom, sp, points[i], tol, opt);
        e.gamma_star = a.gamma_star;
        e.admissible = a.admissible;
        e.margin = a.margin;
        e.ok = true;
      } catch (const std::exception& ex) {
        e.ok = false;
        e.gamma_star = std::numeric_limits<double>::quiet_NaN();
        e.margin = std::numeric_limits<double>::quiet_NaN();
        e.error = ex.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  map.radially_increasing = true;
  for (size_t i = 1; i < map.entries.size(); ++i) {
    const auto &a = map.entries[i - 1], &b = map.entries[i];
    if (a.ok && b.ok && norm(b.q) > norm(a.q) && !(b.gamma_star > a.gamma_star)) map.radially_increasing = false;
  }
  return map;
}

double ball_admissible_radius(const DiscreteDomain& dom, const Spectrum& sp, const Point& direction, double tol,
                              const GreenOptions& opt) {
  const auto& s = dom.spec();
  if (!(s.kind == DomainKind::UnitBall || s.kind == DomainKind::Ball))
    throw ConfigError("admissible radius is defined for balls");
  const Point w = (1.0 / norm(direction)) * direction;
  const double R = s.effective_radius();
  auto f = [&](double rho) {
    Point q = rho * w;
    return 3.0 * gamma_star(dom, sp, q, tol, opt).value - lambda1_for(dom, sp, q);
  };
  double lo = 0.0, hi = 0.9 * R;
  if (f(lo) >= 0.0) return 0.0;
  while (f(hi) < 0.0) hi = 0.5 * (hi + R);
  while (hi - lo > 1e-9 * R) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double normal_derivative_phi1(const DiscreteDomain& dom, const Spectrum& sp, const Point& xb) {
  if (dom.mode() == Mode::Radial) {
    const int n = dom.size();
    const double h = dom.h();
    return std::abs((-4.0 * sp.fields(n - 1, 0) + sp.fields(n - 2, 0)) / (2.0 * h));
  }
  // inward normal from the level-set gradient
  Point nu;
  const double e = 1e-6;
  for (int a = 0; a < 3; ++a) {
    Point d{0, 0, 0};
    d[a] = e;
    nu[a] = -(dom.spec().level_set(xb + d) - dom.spec().level_set(xb - d)) / (2 * e);
  }
  nu = (1.0 / norm(nu)) * nu;
  const double s1 = 2.0 * dom.h(), s2 = 4.0 * dom.h();
  double f1 = sp.value(dom, 0, xb + s1 * nu), f2 = sp.value(dom, 0, xb + s2 * nu);
  return std::abs((f1 * s2 * s2 - f2 * s1 * s1) / (s1 * s2 * (s2 - s1)));
}

BoundaryFit boundary_asymptote_fit(const DiscreteDomain& dom, const Spectrum& sp, const Point& direction,
                                   const std::vector<double>& distances, double tol, const GreenOptions& opt) {
  const auto& s = dom.spec();
  if (!(s.kind == DomainKind::UnitBall || s.kind == DomainKind::Ball))
    throw ConfigError("boundary asymptote fit is implemented for balls");
  if (distances.size() < 2) throw ConfigError("need at least two distances");
  const Point w = (1.0 / norm(direction)) * direction;
  const double R = s.effective_radius();
  BoundaryFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, pin = 0;
  for (double d : distances) {
    Point q = (R - d) * w;
    double gap = lambda1_for(dom, sp, q) - gamma_star(dom, sp, q, tol, opt).value;
    fit.d.push_back(d);
    fit.gap.push_back(gap);
    double x = std::log(d), y = std::log(gap);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    pin += y - 3.0 * x;
  }
  const double n = static_cast<double>(distances.size());
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.prefactor_free = std::exp((sy - fit.exponent * sx) / n);
  fit.prefactor_pinned = std::exp(pin / n);
  double dn = normal_derivative_phi1(dom, sp, R * w);
  fit.predicted = 8.0 * kPi * dn * dn;
  return fit;
}

Point grad_robin(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q,
                 const GreenOptions& opt) {
  Point g{0, 0, 0};
  if (dom.mode() == Mode::Radial) {
    BallGreenSeries series(gamma, dom.spec().effective_radius());
    check_gamma(dom, sp, gamma, {1e-3, 0, 0}, opt, nullptr);
    const double d = 1e-5;
    for (int a = 0; a < 3; ++a) {
      Point e{0, 0, 0};
      e[a] = d;
      g[a] = (series.robin(q + e) - series.robin(q - e)) / (2.0 * d);
    }
    return g;
  }
  check_gamma(dom, sp, gamma, q, opt, nullptr);
  const double d = dom.h();
  ShiftedSolver solver(dom, -gamma);
  for (int a = 0; a < 3; ++a) {
    Point e{0, 0, 0};
    e[a] = d;
    check_source(dom, q + e);
    check_source(dom, q - e);
    double rp = robin_from_h(dom, smooth_part(dom, solver, gamma, q + e), q + e);
    double rm = robin_from_h(dom, smooth_part(dom, solver, gamma, q - e), q - e);
    g[a] = (rp - rm) / (2.0 * d);
  }
  return g;
}

Point grad_gamma_star(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, double tol,
                      const GreenOptions& opt) {
  const double gs = gamma_star(dom, sp, q, tol, opt).value;
  const double dg = 1e-4 * lambda1_for(dom, sp, q);
  const double dR = (robin(dom, sp, gs + dg, q, opt) - robin(dom, sp, gs - dg, q, opt)) / (2.0 * dg);
  if (std::abs(dR) < 1e-12) throw NumericalError("d R / d gamma vanishes at gamma*", dR);
  Point gr = grad_robin(dom, sp, gs, q, opt);
  return (-1.0 / dR) * gr;
}

BnBounds bn_bounds(const DiscreteDomain& dom, const Spectrum& sp, const GammaStarMap& map, const GreenOptions& opt) {
  BnBounds b;
  const double rho = std::cbrt(3.0 * dom.spec().volume() / (4.0 * kPi));
  b.lower = kPi * kPi / (rho * rho) / 4.0;
  double min_r0 = std::numeric_limits<double>::infinity();
  b.druet_min = std::numeric_limits<double>::infinity();
  for (const auto& e : map.entries) {
    if (!e.ok) continue;
    b.druet_min = std::min(b.druet_min, e.gamma_star);
    min_r0 = std::min(min_r0, robin(dom, sp, 0.0, e.q, opt));
  }
  b.upper_alpha3 = b.lower * min_r0 * min_r0;
  b.upper_normalized = b.lower * std::pow(min_r0 / kAlpha3, 2);
  b.lower_ok = b.lower <= b.druet_min * (1.0 + 1e-6);
  return b;
}

}  // namespace critheat
