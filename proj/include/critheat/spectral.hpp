#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "critheat/domain.hpp"

namespace critheat {

// Dirichlet eigenpairs; fields are nodal values with sum_i w_i phi_k(i)^2 = 1.
struct Spectrum {
  std::vector<double> eigenvalues;
  Eigen::MatrixXd fields;
  std::vector<double> residuals;
  double tol = 0.0;
  std::string domain_hash;
  Mode mode = Mode::Full3d;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  double lambda1() const { return eigenvalues.front(); }
  double gap() const { return count() > 1 ? eigenvalues[1] - eigenvalues[0] : 0.0; }
  double value(const DiscreteDomain& dom, int k, const Point& x) const { return dom.interpolate(fields.col(k), x); }
};

Spectrum eigenpairs(const DiscreteDomain& dom, int K, double tol);

// Empirical tail model for sum_{k>K} e^{-lambda_k t} |phi_k(x) phi_k(y)|.
double kernel_tail_bound(const DiscreteDomain& dom, const Spectrum& sp, double t);
// Smallest t at which the tail is below tol times the leading term.
double tau_min(const DiscreteDomain& dom, const Spectrum& sp, double tol);

struct KernelValue {
  double value = 0.0;
  double tail_bound = 0.0;
  bool trusted = true;
  std::string warning;
};

KernelValue heat_kernel(const DiscreteDomain& dom, const Spectrum& sp, double t, const Point& x, const Point& y,
                        double tol = 1e-6);

struct VaradhanResult {
  bool pass = false;
  bool skipped = false;
  double lower = 0.0;   // p_free (1 - e^{-delta^2/4 tau})
  double kernel = 0.0;  // p_tau^Omega(0, y)
  std::string warning;
};

VaradhanResult varadhan_lower_check(const DiscreteDomain& dom, const Spectrum& sp, double tau, const Point& y,
                                    double delta, double tol = 1e-6);

double free_heat_kernel(double t, double r);

void save_spectrum(const Spectrum& sp, const std::string& path);
std::optional<Spectrum> load_spectrum(const std::string& path);

}  // namespace critheat
