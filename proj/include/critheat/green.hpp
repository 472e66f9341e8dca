#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "critheat/domain.hpp"
#include "critheat/spectral.hpp"

namespace critheat {

struct GreenOptions {
  double margin_frac = 0.02;         // resonance margin for grid solves, fraction of lambda_1
  double series_margin_frac = 1e-9;  // margin for the ball series (no conditioning issue)
  double warn_frac = 0.02;           // warn when gamma is this close to a higher eigenvalue
};

// theta_gamma(r) = alpha_3 (1 - cos(sqrt(gamma) r)) / r, with its r -> 0 limit.
double theta_gamma(double gamma, double r);
// Gamma(x) = alpha_3 / |x|
inline double fundamental(double r) { return kAlpha3 / r; }

// Closed forms on the unit ball with the source at the center.
double ball_robin_center(double gamma);                // alpha_3 sqrt(g) cot(sqrt(g))
double ball_regular_part_center(double gamma, double r);  // H_gamma(r, 0)

// Exact Legendre-Bessel expansion of H_gamma on a ball of radius R (centered at 0).
class BallGreenSeries {
 public:
  BallGreenSeries(double gamma, double radius = 1.0);
  double H(const Point& x, const Point& y) const;
  double robin(const Point& q) const;
  double gamma() const { return gamma_; }

 private:
  double h_unit(const Point& x, const Point& y, double gamma_unit) const;
  double gamma_, radius_;
};

struct GreenData {
  double gamma = 0.0;
  Point source{0, 0, 0};
  double robin = 0.0;
  Eigen::VectorXd h;  // smooth component at the unknowns (empty when the series path is used)
  Eigen::VectorXd H;  // regular part at the unknowns
  bool series = false;
  std::vector<std::string> warnings;
};

// Which eigenvalue bounds the admissible gamma range for a query (grid value or exact ball value).
double lambda1_for(const DiscreteDomain& dom, const Spectrum& sp, const Point& q);
bool uses_ball_series(const DiscreteDomain& dom, const Point& q);

GreenData regular_part(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& y,
                       const GreenOptions& opt = {});
double robin(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q, const GreenOptions& opt = {});

// H_gamma(., xi) as a pointwise function together with its source gradient.
class RegularPart {
 public:
  virtual ~RegularPart() = default;
  virtual double gamma() const = 0;
  virtual Point source() const = 0;
  virtual double H(const Point& x) const = 0;
  virtual Point grad_source(const Point& x) const = 0;  // gradient in the second argument
  virtual double robin() const = 0;
};

std::unique_ptr<RegularPart> make_regular_part(const DiscreteDomain& dom, const Spectrum& sp, double gamma,
                                               const Point& xi, const GreenOptions& opt = {});
std::unique_ptr<RegularPart> make_ball_regular_part(double gamma, const Point& xi, double radius = 1.0);

struct RobinCurve {
  Point q{0, 0, 0};
  std::vector<double> gammas;
  std::vector<double> values;
  bool monotone = true;
  std::optional<double> root;  // linear interpolation between the bracketing samples
};

RobinCurve robin_curve(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, const std::vector<double>& gammas,
                       const GreenOptions& opt = {});

struct GammaStar {
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  int iterations = 0;
};

GammaStar gamma_star(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, double tol = 1e-8,
                     const GreenOptions& opt = {});

struct Admissibility {
  bool admissible = false;
  double margin = 0.0;  // lambda_1 - 3 gamma*
  double gamma_star = 0.0;
  double lambda1 = 0.0;
};

Admissibility admissible(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, double tol = 1e-8,
                         const GreenOptions& opt = {});

struct MapEntry {
  Point q{0, 0, 0};
  double gamma_star = 0.0;
  bool admissible = false;
  double margin = 0.0;
  bool ok = false;
  std::string error;
};

struct GammaStarMap {
  std::vector<MapEntry> entries;
  bool radially_increasing = false;  // reported only, along the sample order
};

GammaStarMap gamma_star_map(const DiscreteDomain& dom, const Spectrum& sp, const std::vector<Point>& points,
                            double tol = 1e-8, int jobs = 1, const GreenOptions& opt = {});

// Radius d* of the admissible ball, 3 gamma*(d* e) = lambda_1, by bisection along a direction.
double ball_admissible_radius(const DiscreteDomain& dom, const Spectrum& sp, const Point& direction = {1, 0, 0},
                              double tol = 1e-8, const GreenOptions& opt = {});

// |d phi_1 / d nu| at a boundary point, by one-sided differences along the inward normal.
double normal_derivative_phi1(const DiscreteDomain& dom, const Spectrum& sp, const Point& boundary_point);

struct BoundaryFit {
  std::vector<double> d, gap;  // gap = lambda_1 - gamma*
  double exponent = 0.0;       // free log-log slope
  double prefactor_free = 0.0;
  double prefactor_pinned = 0.0;  // exponent fixed to 3
  double predicted = 0.0;         // 8 pi (d_nu phi_1)^2
};

BoundaryFit boundary_asymptote_fit(const DiscreteDomain& dom, const Spectrum& sp, const Point& direction,
                                   const std::vector<double>& distances, double tol = 1e-10,
                                   const GreenOptions& opt = {});

Point grad_gamma_star(const DiscreteDomain& dom, const Spectrum& sp, const Point& q, double tol = 1e-10,
                      const GreenOptions& opt = {});
// Gradient of the Robin function in x at fixed gamma.
Point grad_robin(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q,
                 const GreenOptions& opt = {});

struct BnBounds {
  double lower = 0.0;             // lambda_1(ball of equal volume) / 4
  double upper_alpha3 = 0.0;      // lower * min R_0^2, Robin function with the alpha_3 normalization
  double upper_normalized = 0.0;  // lower * min (R_0 / alpha_3)^2
  double druet_min = 0.0;         // min over the sampled map of gamma*
  bool lower_ok = false;          // lower <= druet_min
};

BnBounds bn_bounds(const DiscreteDomain& dom, const Spectrum& sp, const GammaStarMap& map,
                   const GreenOptions& opt = {});

}  // namespace critheat
