#pragma once

#include <complex>
#include <string>
#include <vector>

#include "critheat/domain.hpp"
#include "critheat/green.hpp"
#include "critheat/spectral.hpp"

namespace critheat {

enum class Provenance { EigenSum, GaussianSplit };
std::string to_string(Provenance p);

struct KernelOptions {
  double split_frac = 0.9;     // radius of the free-kernel ball, fraction of dist(q, boundary)
  double gauss_tol = 1e-6;     // Gaussian split trusted while e^{-eps^2 / 4 tau} <= gauss_tol
  double switch_tol = 0.01;    // required agreement of the two routes at the switch
  double pole_tol = 1e-10;     // relative distance to a pole of I~ treated as an error
  double resonance_frac = 0.02;
  GreenOptions green;
};

// I(tau) = int p_tau(q, y) G_gamma(y, q) dy and its Laplace transform, for a fixed anchor q.
class NonlocalKernel {
 public:
  NonlocalKernel(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q,
                 const KernelOptions& opt = {});

  double gamma() const { return gamma_; }
  const Point& q() const { return q_; }
  double robin() const { return robin_; }
  double lambda1() const { return lambda_.front(); }
  double lambda2() const { return lambda_.size() > 1 ? lambda_[1] : lambda_.front(); }
  double split_radius() const { return eps_; }
  double tau_switch() const { return tau_switch_; }
  double switch_mismatch() const { return switch_mismatch_; }
  double weyl_cut() const { return lambda_cut_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double eigen_sum(double tau) const;       // truncated series plus Weyl tail
  double gaussian_split(double tau) const;  // free kernel on B_eps(q), mean-value property for the smooth part
  double I(double tau, Provenance* prov = nullptr) const;
  double K(double tau) const { return std::exp(gamma_ * tau) * I(tau); }

  std::complex<double> I_tilde(std::complex<double> xi) const;
  double c_inf() const;
  double leading_coefficient() const { return coef_.front(); }  // c_3 phi_1(q)^2 / (lambda_1 - gamma)
  static double singular_coefficient();                          // sqrt(tau) I(tau) -> alpha_3 / sqrt(pi)
  // Second coefficient of I~(xi) in powers of xi^{-1/2} for the series-plus-tail model.
  double tilde_second_coefficient() const;

 private:
  double weyl_time(double tau) const;
  std::complex<double> weyl_laplace(std::complex<double> xi) const;

  double gamma_;
  Point q_;
  double robin_ = 0.0, eps_ = 0.0, tau_switch_ = 0.0, switch_mismatch_ = 0.0, lambda_cut_ = 0.0;
  double pole_tol_;
  std::vector<double> lambda_, coef_;
  std::vector<std::string> warnings_;
};

struct ITauTable {
  Point q{0, 0, 0};
  double gamma = 0.0;
  double tau_switch = 0.0;
  std::vector<double> tau, value;
  std::vector<Provenance> provenance;
  std::string to_csv() const;
};

ITauTable i_tau_table(const NonlocalKernel& k, const std::vector<double>& taus);
std::vector<double> log_grid(double lo, double hi, int n);

// Least-squares fit sqrt(tau) I(tau) ~ c1 + c2 sqrt(tau) + c3 tau over [lo, hi].
struct SmallTauFit {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};
SmallTauFit fit_small_tau(const NonlocalKernel& k, double lo, double hi, int n = 16);

std::complex<double> i_tilde(const NonlocalKernel& k, std::complex<double> xi);
double residue_c_inf(const NonlocalKernel& k);

// Winding number of I~ along the rectangle [re_lo, re_hi] x [-im_max, im_max].
struct ZeroCheck {
  int zeros = 0;
  double min_abs = 0.0;
  int samples = 0;
};
ZeroCheck count_zeros(const NonlocalKernel& k, double re_lo, double re_hi, double im_max, int samples = 4000);

struct SigmaOptions {
  double abscissa_frac = 0.8;  // a = gamma + frac (lambda_1 - gamma)
  double tau_max = 10.0;       // longest lag evaluated
  double tol = 1e-6;           // truncation tolerance of the Bromwich integral, relative to c_inf
  double y_limit = 1e7;
  int panel_order = 16;
};

// L(tau) = e^{gamma tau} sigma(tau) = c_inf + sum_j e_j tau^{nu_j - 1} e^{-(b - gamma) tau} / Gamma(nu_j) + remainder.
class SigmaKernel {
 public:
  SigmaKernel(const NonlocalKernel& k, const SigmaOptions& opt = {});

  double c_inf() const { return c_inf_; }
  double abscissa() const { return a_; }
  double shift() const { return b_; }
  const std::vector<double>& coefficients() const { return e_; }
  double tail_estimate() const { return tail_; }
  double y_max() const { return ymax_; }
  size_t nodes() const { return y_.size(); }
  double tau_max() const { return tau_max_; }

  double L(double tau) const;
  double sigma(double tau) const { return std::exp(-gamma_ * tau) * L(tau); }
  double M(double tau) const;  // int_0^tau L
  double N(double tau) const;  // int_0^tau M
  // M and N at tau = m dt for m = 0..n
  void lag_moments(double dt, int n, std::vector<double>& M, std::vector<double>& N) const;

  struct Report {
    double small_tau_exponent = 0.0;  // log-log slope of L - c_inf near 0
    double small_tau_constant = 0.0;  // sqrt(tau) sigma(tau) at the smallest sample
    double decay_rate = 0.0;          // fitted rate of |L - c_inf| at large tau
  };
  Report report() const;

 private:
  void explicit_moments(double tau, double& L, double& M, double& N) const;
  double gamma_, c_inf_, a_, b_, tau_max_, tail_ = 0.0, ymax_ = 0.0;
  std::vector<double> e_, nu_;
  std::vector<double> y_;
  std::vector<std::complex<double>> w_;  // rem(-a + i y) * quadrature weight / pi
};

SigmaKernel sigma_kernel(const NonlocalKernel& k, const SigmaOptions& opt = {});

// Uniformly sampled series v_i = f(t0 + i dt).
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> v;
  double t(size_t i) const { return t0 + dt * static_cast<double>(i); }
  size_t size() const { return v.size(); }
};

// J(q, t) = -int_0^{t - t0} K(tau) Lambda'(t - tau) dtau with K = e^{gamma tau} I, piecewise linear Lambda'.
TimeSeries duhamel_forward(const NonlocalKernel& k, const TimeSeries& lambda_dot);

struct InverseOptions {
  bool extend = true;  // h given on [t0, inf): build the smooth extension on [t0 - 1, t0)
};

struct InverseResult {
  TimeSeries lambda, lambda_dot, h;  // h: the series actually inverted, starting at t0 - 1
  double beta0 = 0.0;
  double decay_weight = 0.0;  // fitted c in |h| ~ mu_0^c
  std::vector<std::string> warnings;
};

InverseResult invert_nonlocal(const NonlocalKernel& k, const SigmaKernel& sk, const TimeSeries& h, double t0,
                              const InverseOptions& opt = {});

// C^infinity step with eta(0) = 0, eta(1) = 1.
double smooth_step(double s);

struct RoundTrip {
  double rel_error = 0.0;       // mu_0^{l_1}-weighted sup norm of the Lambda' error on [t0, t_end]
  double rel_error_ext = 0.0;   // same with the extension built from h on [t0, inf)
  TimeSeries lambda_dot, forward, recovered;
  TimeSeries recovered_lambda;
};

RoundTrip nonlocal_round_trip(const NonlocalKernel& k, double l1, double t0, double t_end, double dt,
                              double compare_end, const SigmaOptions& opt = {});

}  // namespace critheat
