#include "critheat/nonlocal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "critheat/quadrature.hpp"

namespace critheat {

using cd = std::complex<double>;

std::string to_string(Provenance p) { return p == Provenance::EigenSum ? "eigen-sum" : "gaussian-split"; }

namespace {

// local Weyl density of sum_k phi_k(q)^2 delta(lambda - lambda_k), times c_3
const double kWeyl = kC3 / (4.0 * kPi * kPi);

double weyl_log_term(double gamma, double lc) {
  if (gamma <= 0.0) return 0.0;
  double sg = std::sqrt(gamma), sl = std::sqrt(lc);
  return sg * std::log((sl - sg) / (sl + sg));
}

}  // namespace

double NonlocalKernel::singular_coefficient() { return kAlpha3 / std::sqrt(kPi); }

NonlocalKernel::NonlocalKernel(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q,
                               const KernelOptions& opt)
    : gamma_(gamma), q_(q), pole_tol_(opt.pole_tol) {
  if (sp.count() < 2) throw ConfigError("nonlocal kernel needs at least two eigenpairs");
  if (!(gamma >= 0.0) || gamma >= sp.lambda1()) throw ConfigError("gamma must lie in [0, lambda_1)");
  if (dom.mode() == Mode::Radial && norm(q) > 0.0)
    throw ConfigError("radial spectra only resolve the kernel at the center");
  if (!dom.contains(q)) throw ConfigError("anchor point outside the domain");

  lambda_ = sp.eigenvalues;
  coef_.resize(lambda_.size());
  for (int k = 0; k < sp.count(); ++k) {
    double phi = sp.value(dom, k, q);
    coef_[k] = kC3 * phi * phi / (lambda_[k] - gamma);
    if (k > 0 && lambda_[k] - gamma < opt.resonance_frac * lambda_[k]) {
      warnings_.push_back("gamma close to lambda_" + std::to_string(k + 1) + ": term is ill-conditioned");
    }
  }
  const size_t K = lambda_.size();
  lambda_cut_ = lambda_[K - 1] + 0.5 * (lambda_[K - 1] - lambda_[K - 2]);

  robin_ = critheat::robin(dom, sp, gamma, q, opt.green);
  eps_ = opt.split_frac * dom.boundary_distance(q);
  if (!(eps_ > 0.0)) throw ConfigError("anchor point on the boundary");

  // switch where both routes agree best, within the range the Gaussian split is trusted
  const double hi = eps_ * eps_ / (4.0 * std::log(1.0 / opt.gauss_tol));
  const double lo = hi * 1e-3;
  double best = std::numeric_limits<double>::infinity(), best_tau = hi;
  for (double t : log_grid(lo, hi, 40)) {
    double g = gaussian_split(t), e = eigen_sum(t);
    double rel = std::abs(e - g) / std::abs(g);
    if (rel < best) best = rel, best_tau = t;
  }
  tau_switch_ = best_tau;
  switch_mismatch_ = best;
  if (best > opt.switch_tol) {
    std::ostringstream os;
    os << "eigen-sum and Gaussian split differ by " << best << " at the switch";
    warnings_.push_back(os.str());
  }
}

double NonlocalKernel::weyl_time(double tau) const {
  const double lc = lambda_cut_;
  if (lc * tau > 700.0) return 0.0;
  // sqrt(l)/(l - g) = 1/sqrt(l) + g / (sqrt(l) (l - g))
  double first = std::sqrt(kPi / tau) * std::erfc(std::sqrt(lc * tau));
  double second = 0.0;
  if (gamma_ > 0.0) {
    second = gamma_ * integrate_to_infinity(
                          [&](double s) {
                            double l = lc + s;
                            return std::exp(-l * tau) / (std::sqrt(l) * (l - gamma_));
                          },
                          0.0, 1.0 / tau, 1e-12);
  }
  return kWeyl * (first + second);
}

double NonlocalKernel::eigen_sum(double tau) const {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  double s = 0.0;
  for (size_t k = 0; k < lambda_.size(); ++k) s += coef_[k] * std::exp(-lambda_[k] * tau);
  return s + weyl_time(tau);
}

double NonlocalKernel::gaussian_split(double tau) const {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const double k = std::sqrt(gamma_);
  const double rmax = std::min(eps_, 12.0 * std::sqrt(tau));
  const double norm3 = std::pow(4.0 * kPi * tau, -1.5);
  auto f = [&](double r) {
    double p = norm3 * std::exp(-r * r / (4.0 * tau));
    double sinc = k * r > 1e-8 ? std::sin(k * r) / (k * r) : 1.0 - k * k * r * r / 6.0;
    // G = alpha_3 cos(k r)/r + h, and the spherical mean of h is -R sinc(k r)
    return 4.0 * kPi * p * (kAlpha3 * std::cos(k * r) * r - robin_ * sinc * r * r);
  };
  return integrate(f, 0.0, rmax, 1e-13);
}

double NonlocalKernel::I(double tau, Provenance* prov) const {
  if (tau < tau_switch_) {
    if (prov) *prov = Provenance::GaussianSplit;
    return gaussian_split(tau);
  }
  if (prov) *prov = Provenance::EigenSum;
  return eigen_sum(tau);
}

cd NonlocalKernel::weyl_laplace(cd xi) const {
  const double lc = lambda_cut_;
  const double Lg = weyl_log_term(gamma_, lc);
  cd d = xi + gamma_;
  if (std::abs(d) < 1e-8 * std::max(1.0, gamma_)) {
    // limit xi -> -gamma: int sqrt(l) / (l - g)^2
    double v = std::sqrt(lc) / (lc - gamma_);
    if (gamma_ > 0.0) v -= Lg / (2.0 * gamma_);
    else v += 1.0 / std::sqrt(lc);
    return kWeyl * v;
  }
  cd s = std::sqrt(xi);
  cd F = 2.0 * s * std::atan(s / std::sqrt(lc)) - Lg;
  return kWeyl * F / d;
}

cd NonlocalKernel::I_tilde(cd xi) const {
  if (xi.real() <= -lambda_cut_ && std::abs(xi.imag()) < pole_tol_ * lambda_cut_)
    throw ConfigError("xi on the branch cut of the tail model");
  cd s = 0.0;
  for (size_t k = 0; k < lambda_.size(); ++k) {
    cd d = lambda_[k] + xi;
    if (std::abs(d) < pole_tol_ * lambda_[k]) throw ConfigError("xi at a pole of I~ (-lambda_" + std::to_string(k + 1) + ")");
    s += coef_[k] / d;
  }
  return s + weyl_laplace(xi);
}

double NonlocalKernel::c_inf() const { return 1.0 / I_tilde(cd(-gamma_, 0.0)).real(); }

double NonlocalKernel::tilde_second_coefficient() const {
  double a0 = 0.0;
  for (double c : coef_) a0 += c;
  return a0 - kWeyl * (2.0 * std::sqrt(lambda_cut_) + weyl_log_term(gamma_, lambda_cut_));
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ConfigError("invalid log grid");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

ITauTable i_tau_table(const NonlocalKernel& k, const std::vector<double>& taus) {
  ITauTable t;
  t.q = k.q();
  t.gamma = k.gamma();
  t.tau_switch = k.tau_switch();
  for (double tau : taus) {
    Provenance p;
    double v = k.I(tau, &p);
    t.tau.push_back(tau);
    t.value.push_back(v);
    t.provenance.push_back(p);
  }
  return t;
}

std::string ITauTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "tau,I,provenance\n";
  for (size_t i = 0; i < tau.size(); ++i) os << tau[i] << ',' << value[i] << ',' << to_string(provenance[i]) << '\n';
  return os.str();
}

SmallTauFit fit_small_tau(const NonlocalKernel& k, double lo, double hi, int n) {
  auto taus = log_grid(lo, hi, n);
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    double s = std::sqrt(taus[i]);
    A(i, 0) = 1.0;
    A(i, 1) = s;
    A(i, 2) = taus[i];
    b[i] = s * k.I(taus[i]);
  }
  Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
  return {c[0], c[1], c[2]};
}

cd i_tilde(const NonlocalKernel& k, cd xi) { return k.I_tilde(xi); }
double residue_c_inf(const NonlocalKernel& k) { return k.c_inf(); }

ZeroCheck count_zeros(const NonlocalKernel& k, double re_lo, double re_hi, double im_max, int samples) {
  if (re_lo <= -k.lambda1()) throw ConfigError("contour must stay right of -lambda_1");
  const cd corners[5] = {{re_lo, -im_max}, {re_hi, -im_max}, {re_hi, im_max}, {re_lo, im_max}, {re_lo, -im_max}};
  ZeroCheck zc;
  zc.min_abs = std::numeric_limits<double>::infinity();
  double total = 0.0;
  const int per_side = std::max(8, samples / 4);
  for (int side = 0; side < 4; ++side) {
    cd a = corners[side], b = corners[side + 1];
    cd prev = k.I_tilde(a);
    for (int i = 1; i <= per_side; ++i) {
      cd z = a + (b - a) * (static_cast<double>(i) / per_side);
      cd v = k.I_tilde(z);
      double d = std::arg(v / prev);
      // refine coarse steps so that no winding is missed
      if (std::abs(d) > 0.5) {
        cd zp = a + (b - a) * (static_cast<double>(i - 1) / per_side);
        d = 0.0;
        cd p = prev;
        for (int j = 1; j <= 64; ++j) {
          cd w = k.I_tilde(zp + (z - zp) * (j / 64.0));
          d += std::arg(w / p);
          p = w;
        }
      }
      total += d;
      zc.min_abs = std::min(zc.min_abs, std::abs(v));
      prev = v;
      ++zc.samples;
    }
  }
  zc.zeros = static_cast<int>(std::lround(total / (2.0 * kPi)));
  return zc;
}

// ---------------------------------------------------------------------------------------------

SigmaKernel::SigmaKernel(const NonlocalKernel& k, const SigmaOptions& opt)
    : gamma_(k.gamma()), c_inf_(k.c_inf()), tau_max_(opt.tau_max) {
  if (!(opt.abscissa_frac > 0.0 && opt.abscissa_frac < 1.0)) throw ConfigError("abscissa fraction must lie in (0, 1)");
  if (!(opt.tau_max > 0.0)) throw ConfigError("tau_max must be positive");
  const double l1 = k.lambda1(), g = gamma_;
  a_ = g + opt.abscissa_frac * (l1 - g);
  b_ = 2.0 * l1 - g;
  // sigma~ = (u - p u^2 + p^2 u^3) / alpha_3 + O(u^4), u = xi^{-1/2}, p = I_2 / alpha_3
  const double p = k.tilde_second_coefficient() / kAlpha3;
  nu_ = {0.5, 1.0, 1.5};
  e_ = {1.0 / kAlpha3, -p / kAlpha3, p * p / kAlpha3 + 0.5 * b_ / kAlpha3};

  auto rem = [&](double y) {
    cd xi(-a_, y);
    cd s = 1.0 / ((xi + g) * k.I_tilde(xi));
    for (size_t j = 0; j < e_.size(); ++j) s -= e_[j] * std::pow(xi + b_, -nu_[j]);
    return s;
  };
  // truncation: |int_Y^inf rem (e^{z tau} - 1)/z dy| <= (2/pi) int_Y^inf |rem| / y
  auto tail_at = [&](double Y) {
    double r1 = 0.0, r2 = 0.0;
    for (int i = 0; i < 8; ++i) {
      r1 = std::max(r1, std::abs(rem(Y * (1.0 + i / 8.0))));
      r2 = std::max(r2, std::abs(rem(0.5 * Y * (1.0 + i / 8.0))));
    }
    double pw = r1 > 0.0 && r2 > r1 ? std::max(1.0, std::log2(r2 / r1)) : 1.0;
    return 2.0 / kPi * r1 / pw;
  };
  double Y = std::max(64.0 * l1, 256.0);
  double scale = std::max(std::abs(c_inf_), 1e-300);
  tail_ = tail_at(Y);
  while (tail_ > opt.tol * scale && Y < opt.y_limit) {
    Y *= 2.0;
    tail_ = tail_at(Y);
  }
  ymax_ = Y;
  if (tail_ > opt.tol * scale)
    throw NumericalError("Bromwich integral did not converge; achieved tail estimate", tail_);

  // panels span at most two periods of e^{i y tau_max}; finer near y = 0 where rem varies on the pole scale
  const double osc = 4.0 * kPi / opt.tau_max;
  const auto& gl = gauss_legendre(opt.panel_order);
  double lo = 0.0;
  while (lo < Y) {
    double width = std::min({osc, 0.1 * (l1 - g) + 0.25 * lo, Y - lo});
    double hw = 0.5 * width, mid = lo + hw;
    for (size_t j = 0; j < gl.x.size(); ++j) {
      double y = mid + hw * gl.x[j];
      y_.push_back(y);
      w_.push_back(rem(y) * (hw * gl.w[j] / kPi));
    }
    lo += width;
  }
}

void SigmaKernel::explicit_moments(double tau, double& L, double& M, double& N) const {
  const double c = b_ - gamma_;
  L = M = N = 0.0;
  double Mx = 0.0, sL = 0.0;
  for (size_t j = 0; j < e_.size(); ++j) {
    const double nu = nu_[j];
    if (tau > 0.0) L += e_[j] * std::pow(tau, nu - 1.0) * std::exp(-c * tau) / std::tgamma(nu);
    Mx += e_[j] * boost::math::gamma_p(nu, c * tau) / std::pow(c, nu);
    sL += e_[j] * nu * boost::math::gamma_p(nu + 1.0, c * tau) / std::pow(c, nu + 1.0);
  }
  M = Mx;
  N = tau * Mx - sL;
}

double SigmaKernel::L(double tau) const {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  double Le, Me, Ne;
  explicit_moments(tau, Le, Me, Ne);
  double s = 0.0;
  for (size_t j = 0; j < y_.size(); ++j) {
    cd z(gamma_ - a_, y_[j]);
    s += (w_[j] * std::exp(z * tau)).real();
  }
  return c_inf_ + Le + s;
}

double SigmaKernel::M(double tau) const {
  if (tau < 0.0 || tau > tau_max_ * (1.0 + 1e-12)) throw ConfigError("tau outside the kernel range");
  double Le, Me, Ne;
  explicit_moments(tau, Le, Me, Ne);
  double s = 0.0;
  for (size_t j = 0; j < y_.size(); ++j) {
    cd z(gamma_ - a_, y_[j]);
    s += (w_[j] * (std::exp(z * tau) - 1.0) / z).real();
  }
  return c_inf_ * tau + Me + s;
}

double SigmaKernel::N(double tau) const {
  if (tau < 0.0 || tau > tau_max_ * (1.0 + 1e-12)) throw ConfigError("tau outside the kernel range");
  double Le, Me, Ne;
  explicit_moments(tau, Le, Me, Ne);
  double s = 0.0;
  for (size_t j = 0; j < y_.size(); ++j) {
    cd z(gamma_ - a_, y_[j]);
    s += (w_[j] * ((std::exp(z * tau) - 1.0) / z - tau) / z).real();
  }
  return 0.5 * c_inf_ * tau * tau + Ne + s;
}

void SigmaKernel::lag_moments(double dt, int n, std::vector<double>& M, std::vector<double>& N) const {
  if (n * dt > tau_max_ * (1.0 + 1e-9)) throw ConfigError("lag grid exceeds the kernel range");
  M.assign(n + 1, 0.0);
  N.assign(n + 1, 0.0);
  std::vector<double> sm(n + 1, 0.0), sn(n + 1, 0.0);
  for (size_t j = 0; j < y_.size(); ++j) {
    const cd z(gamma_ - a_, y_[j]);
    const cd step = std::exp(z * dt);
    const cd wz = w_[j] / z, wzz = wz / z;
    cd E = 1.0;
    for (int m = 0; m <= n; ++m) {
      cd Em1 = E - 1.0;
      sm[m] += (wz * Em1).real();
      sn[m] += (wzz * Em1).real() - (wzz * (m * dt)).real();
      E *= step;
    }
  }
  for (int m = 0; m <= n; ++m) {
    double tau = m * dt, Le, Me, Ne;
    explicit_moments(tau, Le, Me, Ne);
    M[m] = c_inf_ * tau + Me + sm[m];
    N[m] = 0.5 * c_inf_ * tau * tau + Ne + sn[m];
  }
}

SigmaKernel::Report SigmaKernel::report() const {
  Report r;
  double t1 = 1e-3, t2 = 1e-2;
  double d1 = std::abs(L(t1) - c_inf_), d2 = std::abs(L(t2) - c_inf_);
  r.small_tau_exponent = std::log(d2 / d1) / std::log(t2 / t1);
  double t0 = 1e-4;
  r.small_tau_constant = std::sqrt(t0) * sigma(t0);
  // sampled before |L - c_inf| reaches the truncation floor
  double ta = std::min(0.2, 0.25 * tau_max_), tb = 3.0 * ta;
  double da = std::abs(L(ta) - c_inf_), db = std::abs(L(tb) - c_inf_);
  r.decay_rate = da > 0.0 && db > 0.0 ? std::log(da / db) / (tb - ta) : 0.0;
  return r;
}

SigmaKernel sigma_kernel(const NonlocalKernel& k, const SigmaOptions& opt) { return SigmaKernel(k, opt); }

// ---------------------------------------------------------------------------------------------

TimeSeries duhamel_forward(const NonlocalKernel& k, const TimeSeries& lambda_dot) {
  const double dt = lambda_dot.dt;
  const int n = static_cast<int>(lambda_dot.size()) - 1;
  if (!(dt > 0.0) || n < 1) throw ConfigError("forward map needs at least two samples with dt > 0");
  if (dt > k.tau_switch())
    throw ConfigError("grid too coarse for the kernel singularity (dt exceeds the switch time)");
  for (double v : lambda_dot.v)
    if (!std::isfinite(v)) throw ConfigError("Lambda' must be finite");

  const double c1 = NonlocalKernel::singular_coefficient();
  const auto& gl = gauss_legendre(6);
  std::vector<double> left(n + 1, 0.0), right(n + 1, 0.0);
  for (int j = 0; j < n; ++j) {
    const double a = j * dt, b = a + dt;
    // singular part c1 tau^{-1/2}: F1 = 2 tau^{1/2}, F2 = (2/3) tau^{3/2}
    auto F1 = [](double t) { return 2.0 * std::sqrt(t); };
    auto F2 = [](double t) { return 2.0 / 3.0 * t * std::sqrt(t); };
    double rising = c1 * ((F2(b) - F2(a)) - a * (F1(b) - F1(a))) / dt;
    double falling = c1 * (b * (F1(b) - F1(a)) - (F2(b) - F2(a))) / dt;
    for (size_t q = 0; q < gl.x.size(); ++q) {
      double tau = a + 0.5 * dt * (gl.x[q] + 1.0);
      double kb = k.K(tau) - c1 / std::sqrt(tau);
      double w = 0.5 * dt * gl.w[q];
      rising += w * kb * (tau - a) / dt;
      falling += w * kb * (b - tau) / dt;
    }
    left[j + 1] += rising;
    right[j] += falling;
  }
  TimeSeries out{lambda_dot.t0, dt, std::vector<double>(n + 1, 0.0)};
  for (int i = 1; i <= n; ++i) {
    double s = 0.0;
    for (int m = 0; m <= i; ++m) {
      double w = (m >= 1 ? left[m] : 0.0) + (m <= i - 1 ? right[m] : 0.0);
      s += w * lambda_dot.v[i - m];
    }
    out.v[i] = -s;
  }
  return out;
}

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  return f(s) / (f(s) + f(1.0 - s));
}

InverseResult invert_nonlocal(const NonlocalKernel& k, const SigmaKernel& sk, const TimeSeries& h, double t0,
                              const InverseOptions& opt) {
  const double dt = h.dt;
  if (!(dt > 0.0) || h.size() < 2) throw ConfigError("inverse map needs at least two samples with dt > 0");
  InverseResult res;
  std::vector<double> hs;
  if (opt.extend) {
    if (std::abs(h.t0 - t0) > 1e-9 * dt) throw ConfigError("h must start at t0");
    const double steps = 1.0 / dt;
    const int next = static_cast<int>(std::lround(steps));
    if (std::abs(steps - next) > 1e-9) throw ConfigError("1/dt must be an integer to build the extension");
    for (int j = 0; j < next; ++j) hs.push_back(smooth_step(j * dt) * h.v[0]);
    hs.insert(hs.end(), h.v.begin(), h.v.end());
  } else {
    if (std::abs(h.t0 - (t0 - 1.0)) > 1e-9 * dt) throw ConfigError("full history must start at t0 - 1");
    hs = h.v;
  }
  const int n = static_cast<int>(hs.size()) - 1;
  res.h = {t0 - 1.0, dt, hs};

  // beta(0) = -c_inf int_0^inf h, truncated where |h| <= 1e-12 of its peak
  double peak = 0.0;
  for (double v : hs) peak = std::max(peak, std::abs(v));
  double integral = 0.0;
  for (int i = 0; i < n; ++i) integral += 0.5 * dt * (hs[i] + hs[i + 1]);
  const int tail_start = n / 2;
  if (peak > 0.0) {
    double a = std::abs(hs[tail_start]), b = std::abs(hs[n]);
    double rate = (a > 0.0 && b > 0.0) ? std::log(a / b) / ((n - tail_start) * dt) : 0.0;
    res.decay_weight = k.gamma() > 0.0 ? rate / (2.0 * k.gamma()) : 0.0;
    if (std::abs(hs[n]) > 1e-12 * peak) {
      if (rate > 0.0) {
        integral += hs[n] / rate;
        res.warnings.push_back("h not negligible at the end of the grid: exponential tail added to int h");
      } else {
        res.warnings.push_back("h does not decay: beta(0) truncated at the end of the grid");
      }
    }
    const double window = (k.lambda1() - k.gamma()) / (2.0 * k.gamma());
    if (k.gamma() > 0.0 && !(res.decay_weight < window))
      res.warnings.push_back("h outside the decay window c < (lambda_1 - gamma)/(2 gamma): estimates not guaranteed");
  }
  res.beta0 = -sk.c_inf() * integral;

  std::vector<double> M, N;
  sk.lag_moments(dt, n, M, N);
  std::vector<double> left(n + 1, 0.0), right(n + 1, 0.0);
  for (int m = 0; m <= n; ++m) {
    if (m >= 1) left[m] = M[m] - (N[m] - N[m - 1]) / dt;
    if (m < n) right[m] = (N[m + 1] - N[m]) / dt - M[m];
  }
  std::vector<double> d(n);
  for (int j = 0; j < n; ++j) d[j] = (hs[j + 1] - hs[j]) / dt;

  res.lambda = {t0 - 1.0, dt, std::vector<double>(n + 1)};
  res.lambda_dot = {t0 - 1.0, dt, std::vector<double>(n + 1)};
  if (hs[0] != 0.0) res.warnings.push_back("h(t0 - 1) != 0: Lambda' singular at the start");
  for (int i = 0; i <= n; ++i) {
    double beta = res.beta0;
    for (int m = 0; m <= i; ++m) {
      double w = (m >= 1 ? left[m] : 0.0) + (m <= i - 1 ? right[m] : 0.0);
      beta += w * hs[i - m];
    }
    double bdot = 0.0;
    for (int j = 0; j < i; ++j) bdot += d[j] * (M[i - j] - M[i - j - 1]);
    if (hs[0] != 0.0 && i > 0) bdot += sk.L(i * dt) * hs[0];
    res.lambda.v[i] = -beta;
    res.lambda_dot.v[i] = -bdot;
  }
  return res;
}

RoundTrip nonlocal_round_trip(const NonlocalKernel& k, double l1, double t0, double t_end, double dt,
                              double compare_end, const SigmaOptions& opt) {
  if (!(t_end > t0) || !(compare_end > t0) || compare_end > t_end) throw ConfigError("invalid round-trip window");
  const int n = static_cast<int>(std::lround((t_end - (t0 - 1.0)) / dt));
  const double rate = 2.0 * k.gamma() * l1;
  RoundTrip rt;
  rt.lambda_dot = {t0 - 1.0, dt, std::vector<double>(n + 1)};
  for (int i = 0; i <= n; ++i) rt.lambda_dot.v[i] = std::exp(-rate * rt.lambda_dot.t(i));
  rt.forward = duhamel_forward(k, rt.lambda_dot);

  SigmaOptions so = opt;
  so.tau_max = n * dt;
  SigmaKernel sk(k, so);
  auto full = invert_nonlocal(k, sk, rt.forward, t0, {false});
  rt.recovered = full.lambda_dot;
  rt.recovered_lambda = full.lambda;

  const int start = static_cast<int>(std::lround(1.0 / dt));
  TimeSeries tail{t0, dt, std::vector<double>(rt.forward.v.begin() + start, rt.forward.v.end())};
  auto ext = invert_nonlocal(k, sk, tail, t0, {true});

  for (int i = start; i <= n; ++i) {
    double t = rt.lambda_dot.t(i);
    if (t > compare_end + 1e-12) break;
    double ref = rt.lambda_dot.v[i];
    rt.rel_error = std::max(rt.rel_error, std::abs(full.lambda_dot.v[i] - ref) / ref);
    rt.rel_error_ext = std::max(rt.rel_error_ext, std::abs(ext.lambda_dot.v[i] - ref) / ref);
  }
  return rt;
}

}  // namespace critheat
