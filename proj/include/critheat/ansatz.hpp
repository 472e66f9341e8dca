#pragma once

#include <functional>
#include <string>
#include <vector>

#include "critheat/domain.hpp"
#include "critheat/green.hpp"

namespace critheat {

// Bubble profile U(y) = alpha_3 (1 + |y|^2)^{-1/2} and its kernel functions.
double bubble(double r);
double bubble_dr(double r);  // U'(r)
Point bubble_grad(const Point& y);
double kernel_z(int i, const Point& y);  // i = 1..3: d U / d y_i, i = 4: (1/2) U + y . grad U
double kernel_z4(double r);

struct BubbleParams {
  double mu = 1.0;
  Point xi{0, 0, 0};
  double gamma = 0.0;
  void validate() const;
};

// mu_0(t) = e^{-2 gamma t}, xi_0(t) = c e^{-2 gamma t}.
struct TimeLaw {
  double gamma = 0.0;
  Point c{0, 0, 0};
  double mu0(double t) const { return std::exp(-2.0 * gamma * t); }
  Point xi0(double t) const { return mu0(t) * c; }
  Point xi0_dot(double t) const { return (-2.0 * gamma * mu0(t)) * c; }
};

double talenti(double mu, const Point& xi, const Point& x);

// u_1 = U_{mu,xi} - mu^{1/2} H_gamma(., xi). Throws ConfigError if H does not match (gamma, xi).
double u1(const RegularPart& H, const BubbleParams& p, const Point& x);

// Closed-form S[u_1] = -d_t u_1 + Delta u_1 + u_1^5, term by term.
struct ErrorTerms {
  double lambda_dot = 0.0;      // Lambda' (mu^{-1/2} 2 Z_4 + mu^{1/2} H)
  double gamma_regular = 0.0;   // -gamma mu^{-1/2} 2 Z_4
  double gamma_singular = 0.0;  // -gamma mu^{-1/2} alpha_3 / |y|; set to 0 at x = xi (see at_center)
  double xi_dot = 0.0;          // mu^{-3/2} xi' . grad U + mu^{1/2} xi' . grad_{x_2} H
  double linear_H = 0.0;        // -5 mu^{-3/2} U^4 H
  double nonlinear = 0.0;       // mu^{-5/2} [(U - mu H)^5 - U^5 + 5 mu U^4 H]
  bool at_center = false;
  double total() const { return lambda_dot + gamma_regular + gamma_singular + xi_dot + linear_H + nonlinear; }
};

ErrorTerms error_u1(const RegularPart& H, const BubbleParams& p, double lambda_dot, const Point& xi_dot,
                    const Point& x);

// 1/2 int |grad u|^2 - 1/6 int u^6 with the discrete stiffness form and nodal weights.
double energy(const DiscreteDomain& dom, const Eigen::VectorXd& u);

// Whole-space radial integrals entering the translation coefficients.
struct BubbleIntegrals {
  double a = 0.0;  // int 5 U^4 y_i d_i U
  double b = 0.0;  // int (d_i U)^2
  double u5 = 0.0; // int U^5
};
BubbleIntegrals bubble_integrals(double r_inf = 1e4);

struct XiCoefficients {
  Point c{0, 0, 0};          // sign follows d_i R (orthogonality-consistent)
  Point c_printed{0, 0, 0};  // -|d_i R| |A| / (4 gamma B), always <= 0
  BubbleIntegrals integrals;
};

XiCoefficients xi0_coefficients(const Point& grad_robin, double gamma);

// Normalized residuals |int M Z_i| / int |M Z_i| over B_{r_inf}, i = 1..4, with a fitted power-law tail.
std::array<double, 4> check_orthogonality_M(const Point& c, double gamma, double mu0, const Point& grad_robin,
                                            double r_inf = 1e4);

// Radial profile m(s) of mode i of M[mu_0, xi_0]: M = (y_i / |y|) m(|y|).
std::function<double(double)> mode_profile(double c_i, double gamma, double mu0, double dR_i);

struct Phi3Report {
  std::vector<double> r, phi, dphi, I;  // samples of phi(r), phi'(r), and the inner integral I(r)
  double sup_phi = 0.0;
  double sup_weighted_dphi = 0.0;  // sup (1 + r) |phi'|
  double exponent_zero = 0.0;      // fitted log-log slope of |I| near 0
  double exponent_inf = 0.0;       // and near infinity
  double orthogonality = 0.0;      // |I(inf)| / int |m z| s^2
};

struct Phi3Options {
  double r_min = 1e-6;
  double r_inf = 1e4;
  double orth_tol = 1e-8;
  double panel_ratio = 1.1;
};

// Bounded solution of phi'' + 2 phi'/r - 2 phi/r^2 + 5 U^4 phi = -m by variation of parameters around z = U'.
Phi3Report phi3_radial_mode(const std::function<double(double)>& m, const Phi3Options& opt = {});

}  // namespace critheat
