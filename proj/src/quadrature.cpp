#include "critheat/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace critheat {

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      double dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16 || iter == 99) {
        rule.x[n - 1 - i] = z;
        rule.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        break;
      }
    }
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  const GaussRule& g = gauss_legendre(order);
  const double w = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    double c = a + (p + 0.5) * w;
    for (int i = 0; i < order; ++i) s += g.w[i] * f(c + 0.5 * w * g.x[i]);
  }
  return 0.5 * w * s;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}

double integrate_singular(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, tol);
}

double integrate_to_infinity(const std::function<double(double)>& f, double a, double scale, double tol) {
  boost::math::quadrature::exp_sinh<double> es;
  auto g = [&](double s) { return scale * f(a + scale * s); };
  return es.integrate(g, tol);
}

}  // namespace critheat
