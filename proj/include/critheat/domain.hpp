#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "critheat/core.hpp"

namespace critheat {

enum class DomainKind { UnitBall, Ball, Box, PerturbedBall };
enum class Mode { Full3d, Radial };

std::string to_string(DomainKind k);
std::string to_string(Mode m);
DomainKind domain_kind_from_string(const std::string& s);
Mode mode_from_string(const std::string& s);

// Deformation profiles P for the perturbed ball r < 1 + t P(x/|x|).
// "x1": P = x1, "z2": P = x3^2, "xyz": P = x1 x2 x3.
double deformation_value(const std::string& id, const Point& x);
Point deformation_gradient(const std::string& id, const Point& x);

struct DomainSpec {
  DomainKind kind = DomainKind::UnitBall;
  double radius = 1.0;
  std::array<double, 3> edges{1.0, 1.0, 1.0};
  std::string deformation;
  double amplitude = 0.0;
  int resolution = 32;
  Mode mode = Mode::Full3d;

  void validate() const;
  // Negative inside, zero on the boundary.
  double level_set(const Point& x) const;
  bool rotationally_symmetric() const;
  double effective_radius() const;  // ball radius (1 for unit ball / perturbed ball)
  double volume() const;
  std::string canonical() const;
};

// Dirichlet data enters (A u)_i through  - coef * g(point).
struct BoundaryArm {
  int node;
  Point point;
  double coef;
};

class DiscreteDomain {
 public:
  explicit DiscreteDomain(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  Mode mode() const { return spec_.mode; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point>& nodes() const { return nodes_; }
  // K = W A, symmetric; W = diagonal quadrature weights (cell volumes).
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::SparseMatrix<double> symmetric_operator() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  const std::vector<BoundaryArm>& arms() const { return arms_; }
  // b_i = sum over arms of coef * g(point), so that A u = f + b is -Delta u = f with u = g on the boundary.
  Eigen::VectorXd lift(const std::function<double(const Point&)>& g) const;

  double h() const { return spacing_[0]; }
  const std::array<double, 3>& spacing() const { return spacing_; }
  const std::array<int, 3>& dims() const { return dims_; }
  const Point& origin() const { return origin_; }
  // Unknown index of grid node (i,j,k), or -1. Radial: i only.
  int index(int i, int j = 0, int k = 0) const;
  Point grid_point(int i, int j, int k) const;

  double boundary_distance(const Point& x) const;
  const Eigen::VectorXd& distance_field() const;
  bool contains(const Point& x) const { return spec_.level_set(x) < 0.0; }

  // Interpolates a nodal field; values at non-unknown grid nodes come from `outside` (default 0).
  double interpolate(const Eigen::VectorXd& field, const Point& x,
                     const std::function<double(const Point&)>& outside = nullptr) const;
  // Triquadratic (radial: quadratic) interpolation centered at the nearest node; all stencil nodes must be unknowns.
  double interpolate_quadratic(const Eigen::VectorXd& field, const Point& x) const;
  int nearest_node(const Point& x) const;

  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return (weights_.array() * a.array() * b.array()).sum(); }
  double integrate(const Eigen::VectorXd& f) const { return weights_.dot(f); }
  std::string hash() const;

 private:
  void build_radial();
  void build_full3d();
  double crossing_fraction(const Point& inside, const Point& outside) const;

  DomainSpec spec_;
  std::vector<Point> nodes_;
  std::vector<int> index_;
  std::vector<BoundaryArm> arms_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::VectorXd weights_;
  std::array<double, 3> spacing_{0, 0, 0};
  std::array<int, 3> dims_{0, 1, 1};
  Point origin_{0, 0, 0};
  mutable std::optional<Eigen::VectorXd> distance_;
};

// Symmetric positive definite solver for (K + s W) x = rhs, s > -lambda_1.
class ShiftedSolver {
 public:
  ShiftedSolver(const DiscreteDomain& dom, double shift);
  ~ShiftedSolver();
  ShiftedSolver(const ShiftedSolver&) = delete;
  ShiftedSolver& operator=(const ShiftedSolver&) = delete;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  double shift() const { return shift_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double shift_;
};

}  // namespace critheat
