#pragma once

#include <functional>
#include <vector>

namespace critheat {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule with n points (cached per n).
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre over [a, b] with `panels` equal panels of `order` points.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels, int order = 8);

// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

// Tanh-sinh; tolerates integrable endpoint singularities.
double integrate_singular(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

// int_a^inf f, with `scale` the expected decay length.
double integrate_to_infinity(const std::function<double(double)>& f, double a, double scale, double tol = 1e-12);

}  // namespace critheat
