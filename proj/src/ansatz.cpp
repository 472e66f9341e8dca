#include "critheat/ansatz.hpp"

#include <cmath>
#include <limits>

#include "critheat/quadrature.hpp"

namespace critheat {

double bubble(double r) { return kAlpha3 / std::sqrt(1.0 + r * r); }

double bubble_dr(double r) { return -kAlpha3 * r * std::pow(1.0 + r * r, -1.5); }

static double bubble_drr(double r) { return kAlpha3 * (2.0 * r * r - 1.0) * std::pow(1.0 + r * r, -2.5); }

Point bubble_grad(const Point& y) {
  double f = -kAlpha3 * std::pow(1.0 + dot(y, y), -1.5);
  return f * y;
}

double kernel_z4(double r) { return 0.5 * kAlpha3 * (1.0 - r * r) * std::pow(1.0 + r * r, -1.5); }

double kernel_z(int i, const Point& y) {
  if (i >= 1 && i <= 3) return bubble_grad(y)[i - 1];
  if (i == 4) return kernel_z4(norm(y));
  throw ConfigError("kernel index must be in 1..4");
}

void BubbleParams::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be nonnegative");
}

double talenti(double mu, const Point& xi, const Point& x) {
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  return bubble(norm(x - xi) / mu) / std::sqrt(mu);
}

static void check_match(const RegularPart& H, const BubbleParams& p) {
  p.validate();
  if (std::abs(H.gamma() - p.gamma) > 1e-12 * std::max(1.0, std::abs(p.gamma)))
    throw ConfigError("regular part was built for a different gamma");
  if (norm(H.source() - p.xi) > 1e-12) throw ConfigError("regular part source does not match xi");
}

double u1(const RegularPart& H, const BubbleParams& p, const Point& x) {
  check_match(H, p);
  return talenti(p.mu, p.xi, x) - std::sqrt(p.mu) * H.H(x);
}

ErrorTerms error_u1(const RegularPart& H, const BubbleParams& p, double lambda_dot, const Point& xi_dot,
                    const Point& x) {
  check_match(H, p);
  const double mu = p.mu, g = p.gamma;
  const double smu = std::sqrt(mu);
  const Point y = (1.0 / mu) * (x - p.xi);
  const double ry = norm(y);
  const double U = bubble(ry), Z4 = kernel_z4(ry);
  const double h = H.H(x);

  ErrorTerms e;
  e.lambda_dot = lambda_dot * (2.0 * Z4 / smu + smu * h);
  e.gamma_regular = -g * 2.0 * Z4 / smu;
  if (ry > 0.0) {
    e.gamma_singular = -g * kAlpha3 / (ry * smu);
  } else {
    e.at_center = true;
  }
  double xd = 0.0;
  if (norm(xi_dot) > 0.0) xd = dot(xi_dot, bubble_grad(y)) / (mu * smu) + smu * dot(xi_dot, H.grad_source(x));
  e.xi_dot = xd;
  const double U4 = U * U * U * U;
  e.linear_H = -5.0 * U4 * h / (mu * smu);
  // (a + b)^5 - a^5 - 5 a^4 b expanded to avoid cancellation, b = -mu H
  const double a = U, b = -mu * h;
  const double b2 = b * b;
  const double rem = b2 * (10.0 * a * a * a + b * (10.0 * a * a + b * (5.0 * a + b)));
  e.nonlinear = rem / (mu * mu * smu);
  return e;
}

double energy(const DiscreteDomain& dom, const Eigen::VectorXd& u) {
  if (u.size() != dom.size()) throw ConfigError("field size does not match the domain");
  const double grad = u.dot(dom.stiffness() * u);
  const double pot = (dom.weights().array() * u.array().square().cube()).sum();
  return 0.5 * grad - pot / 6.0;
}

// int_R^inf g for g ~ a r^{-p} + b r^{-p-1}, p an integer > 1 read off g(R/2)/g(R).
static double power_tail(const std::function<double(double)>& g, double R) {
  const double g1 = g(R), g2 = g(0.5 * R);
  if (g1 == 0.0 || g1 * g2 <= 0.0) return 0.0;
  const double p = std::round(std::log2(g2 / g1));
  if (p < 2.0) return 0.0;
  // g1 = a R^-p + b R^-p-1, g2 = a 2^p R^-p + b 2^{p+1} R^-p-1
  const double Rp = std::pow(R, -p);
  const double det = Rp * std::pow(2.0, p + 1) * Rp / R - Rp / R * std::pow(2.0, p) * Rp;
  const double a = (g1 * std::pow(2.0, p + 1) * Rp / R - Rp / R * g2) / det;
  const double b = (Rp * g2 - std::pow(2.0, p) * Rp * g1) / det;
  return a * std::pow(R, 1.0 - p) / (p - 1.0) + b * Rp / p;
}

// int_0^rinf f(r) dr on log-spaced Gauss panels plus a power-law tail fitted at rinf.
static double radial_integral(const std::function<double(double)>& f, double rinf, double* tail_out = nullptr) {
  const double r0 = 1e-8;
  double total = integrate_panels(f, 0.0, r0, 1, 8);
  const double la = std::log(r0), lb = std::log(rinf);
  const int panels = static_cast<int>(std::ceil((lb - la) / 0.1));
  total += integrate_panels([&](double t) { double s = std::exp(t); return f(s) * s; }, la, lb, panels, 12);
  const double tail = power_tail(f, rinf);
  if (tail_out) *tail_out = tail;
  return total + tail;
}

BubbleIntegrals bubble_integrals(double r_inf) {
  BubbleIntegrals bi;
  // angular average of y_i^2 is r^2/3
  bi.a = 4.0 * kPi / 3.0 *
         radial_integral(
             [](double r) {
               double U = bubble(r);
               return 5.0 * U * U * U * U * bubble_dr(r) * r * r * r;
             },
             r_inf);
  bi.b = 4.0 * kPi / 3.0 * radial_integral([](double r) { double d = bubble_dr(r); return d * d * r * r; }, r_inf);
  bi.u5 = 4.0 * kPi * radial_integral([](double r) { return std::pow(bubble(r), 5) * r * r; }, r_inf);
  return bi;
}

XiCoefficients xi0_coefficients(const Point& grad_robin, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  XiCoefficients out;
  out.integrals = bubble_integrals();
  const double A = out.integrals.a, B = out.integrals.b;
  for (int i = 0; i < 3; ++i) {
    out.c[i] = -grad_robin[i] * A / (4.0 * gamma * B);
    out.c_printed[i] = -std::abs(grad_robin[i]) * std::abs(A) / (4.0 * gamma * B);
  }
  return out;
}

std::array<double, 4> check_orthogonality_M(const Point& c, double gamma, double mu0, const Point& grad_robin,
                                            double r_inf) {
  const Point xi_dot = (-2.0 * gamma * mu0) * c;
  const auto& gt = gauss_legendre(8);
  const int nphi = 16;
  auto M = [&](const Point& y) {
    double U = bubble(norm(y));
    return mu0 * dot(xi_dot, bubble_grad(y)) - 2.5 * U * U * U * U * mu0 * mu0 * dot(y, grad_robin);
  };
  // angular sums of M Z_i and |M Z_i| on the sphere of radius r, times r^2
  auto shell = [&](double r, int i, bool absval) {
    double s = 0.0;
    for (size_t a = 0; a < gt.x.size(); ++a) {
      double ct = gt.x[a], st = std::sqrt(1.0 - ct * ct);
      for (int b = 0; b < nphi; ++b) {
        double ph = 2.0 * kPi * (b + 0.5) / nphi;
        Point y{r * st * std::cos(ph), r * st * std::sin(ph), r * ct};
        double v = M(y) * kernel_z(i, y);
        s += gt.w[a] * (absval ? std::abs(v) : v);
      }
    }
    return s * (2.0 * kPi / nphi) * r * r;
  };
  std::array<double, 4> res{};
  for (int i = 1; i <= 4; ++i) {
    double num = radial_integral([&](double r) { return shell(r, i, false); }, r_inf);
    double den = radial_integral([&](double r) { return shell(r, i, true); }, r_inf);
    res[i - 1] = den > 0.0 ? std::abs(num) / den : 0.0;
  }
  return res;
}

std::function<double(double)> mode_profile(double c_i, double gamma, double mu0, double dR_i) {
  const double xi_dot = -2.0 * gamma * mu0 * c_i;
  return [=](double s) {
    double U = bubble(s);
    return mu0 * xi_dot * bubble_dr(s) - 2.5 * mu0 * mu0 * dR_i * s * U * U * U * U;
  };
}

namespace {

// S(i, j) = int_{-1}^{x_i} l_j(t) dt for the Lagrange basis on Gauss nodes.
struct SpectralIntegrator {
  int n;
  std::vector<double> x, w;
  std::vector<double> S;
  explicit SpectralIntegrator(int order) : n(order) {
    const auto& g = gauss_legendre(n);
    x = g.x;
    w = g.w;
    S.assign(n * n, 0.0);
    auto lag = [&](int j, double t) {
      double v = 1.0;
      for (int k = 0; k < n; ++k)
        if (k != j) v *= (t - x[k]) / (x[j] - x[k]);
      return v;
    };
    for (int i = 0; i < n; ++i) {
      double half = 0.5 * (x[i] + 1.0), mid = 0.5 * (x[i] - 1.0);
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += w[k] * lag(j, half * x[k] + mid);
        S[i * n + j] = s * half;
      }
    }
  }
};

double fit_slope(const std::vector<double>& r, const std::vector<double>& v, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (size_t k = 0; k < r.size(); ++k) {
    if (r[k] < lo || r[k] > hi || v[k] == 0.0) continue;
    double a = std::log(r[k]), b = std::log(std::abs(v[k]));
    sx += a, sy += b, sxx += a * a, sxy += a * b;
    ++cnt;
  }
  if (cnt < 2) return std::numeric_limits<double>::quiet_NaN();
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

}  // namespace

Phi3Report phi3_radial_mode(const std::function<double(double)>& m, const Phi3Options& opt) {
  if (!(opt.r_min > 0.0) || !(opt.r_inf > opt.r_min)) throw ConfigError("invalid radial range");
  static const SpectralIntegrator si(12);
  const int n = si.n;
  const double la = std::log(opt.r_min), lb = std::log(opt.r_inf);
  const int panels = static_cast<int>(std::ceil((lb - la) / std::log(opt.panel_ratio)));
  const double dt = (lb - la) / panels;
  const int total = panels * n;

  std::vector<double> r(total), g(total), gabs(total);
  for (int p = 0; p < panels; ++p)
    for (int k = 0; k < n; ++k) {
      double t = la + dt * (p + 0.5 * (si.x[k] + 1.0));
      double s = std::exp(t);
      r[p * n + k] = s;
      double v = m(s) * bubble_dr(s) * s * s;
      g[p * n + k] = v * s;  // ds = s dt
      gabs[p * n + k] = std::abs(v) * s;
    }

  // I(r_min) from the small-r behaviour: integrate on [0, r_min] directly
  double I0 = integrate_panels([&](double s) { return m(s) * bubble_dr(s) * s * s; }, 0.0, opt.r_min, 1, 8);

  auto cumulative = [&](const std::vector<double>& f, double start, std::vector<double>& at_nodes) {
    at_nodes.assign(total, 0.0);
    double acc = start;
    for (int p = 0; p < panels; ++p) {
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += si.S[i * n + j] * f[p * n + j];
        at_nodes[p * n + i] = acc + 0.5 * dt * s;
      }
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += si.w[j] * f[p * n + j];
      acc += 0.5 * dt * s;
    }
    return acc;
  };

  std::vector<double> Ifwd, absacc;
  double Iend = cumulative(g, I0, Ifwd);
  double absint = cumulative(gabs, std::abs(I0), absacc);
  auto gfun = [&](double s) { return m(s) * bubble_dr(s) * s * s; };
  const double tail = power_tail(gfun, opt.r_inf);
  const double Iinf = Iend + tail;
  absint += std::abs(tail);

  Phi3Report rep;
  rep.orthogonality = absint > 0.0 ? std::abs(Iinf) / absint : 0.0;
  if (absint == 0.0) {
    rep.r = r;
    rep.phi.assign(total, 0.0);
    rep.dphi.assign(total, 0.0);
    rep.I.assign(total, 0.0);
    return rep;
  }
  if (rep.orthogonality > opt.orth_tol)
    throw NumericalError("mode profile is not orthogonal to the kernel: inner integral does not decay",
                         rep.orthogonality);

  // forward accumulation for r <= 1, the decaying representation -int_r^inf beyond
  std::vector<double> I(total);
  for (int k = 0; k < total; ++k) I[k] = r[k] <= 1.0 ? Ifwd[k] : Ifwd[k] - Iinf;

  std::vector<double> f2(total);
  for (int k = 0; k < total; ++k) {
    double z = bubble_dr(r[k]);
    f2[k] = -I[k] / (r[k] * r[k] * z * z) * r[k];
  }
  // int_0^{r_min} of -I/(s^2 z^2) ~ O(r_min^2): negligible, start at 0
  std::vector<double> W;
  cumulative(f2, 0.0, W);

  rep.r = r;
  rep.I = I;
  rep.phi.resize(total);
  rep.dphi.resize(total);
  for (int k = 0; k < total; ++k) {
    double z = bubble_dr(r[k]);
    rep.phi[k] = z * W[k];
    rep.dphi[k] = bubble_drr(r[k]) * W[k] - I[k] / (r[k] * r[k] * z);
    rep.sup_phi = std::max(rep.sup_phi, std::abs(rep.phi[k]));
    rep.sup_weighted_dphi = std::max(rep.sup_weighted_dphi, (1.0 + r[k]) * std::abs(rep.dphi[k]));
  }
  rep.exponent_zero = fit_slope(r, I, 1e2 * opt.r_min, 1e4 * opt.r_min);
  rep.exponent_inf = fit_slope(r, I, 1e-2 * opt.r_inf, opt.r_inf);
  return rep;
}

}  // namespace critheat
