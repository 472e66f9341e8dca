#include "critheat/domain.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <limits>
#include <sstream>

#include "critheat/quadrature.hpp"

namespace critheat {

std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::UnitBall: return "unit-ball";
    case DomainKind::Ball: return "ball";
    case DomainKind::Box: return "box";
    case DomainKind::PerturbedBall: return "perturbed-ball";
  }
  return "?";
}

std::string to_string(Mode m) { return m == Mode::Radial ? "radial" : "full3d"; }

DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "unit-ball") return DomainKind::UnitBall;
  if (s == "ball") return DomainKind::Ball;
  if (s == "box") return DomainKind::Box;
  if (s == "perturbed-ball") return DomainKind::PerturbedBall;
  throw ConfigError("unknown domain kind '" + s + "'");
}

Mode mode_from_string(const std::string& s) {
  if (s == "full3d") return Mode::Full3d;
  if (s == "radial") return Mode::Radial;
  throw ConfigError("unknown mode '" + s + "'");
}

double deformation_value(const std::string& id, const Point& x) {
  if (id == "x1") return x[0];
  if (id == "z2") return x[2] * x[2];
  if (id == "xyz") return x[0] * x[1] * x[2];
  throw ConfigError("unknown deformation '" + id + "'");
}

Point deformation_gradient(const std::string& id, const Point& x) {
  if (id == "x1") return {1.0, 0.0, 0.0};
  if (id == "z2") return {0.0, 0.0, 2.0 * x[2]};
  if (id == "xyz") return {x[1] * x[2], x[0] * x[2], x[0] * x[1]};
  throw ConfigError("unknown deformation '" + id + "'");
}

namespace {

std::vector<Point> fibonacci_sphere(int n) {
  std::vector<Point> pts(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n;
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts[i] = {s * std::cos(golden * i), s * std::sin(golden * i), z};
  }
  return pts;
}

Point spherical(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

}  // namespace

void DomainSpec::validate() const {
  if (kind == DomainKind::Ball && !(radius > 0.0)) throw ConfigError("ball radius must be positive");
  if (kind == DomainKind::Box)
    for (double e : edges)
      if (!(e > 0.0)) throw ConfigError("box edges must be positive");
  if (mode == Mode::Full3d && resolution < 8) throw ConfigError("resolution must be at least 8 nodes per axis");
  if (mode == Mode::Radial && resolution < 4) throw ConfigError("radial resolution must be at least 4 nodes");
  if (mode == Mode::Radial && !rotationally_symmetric())
    throw ConfigError("radial mode requires a rotationally symmetric domain");
  if (kind == DomainKind::PerturbedBall) {
    deformation_value(deformation, {0, 0, 0});
    // the ray map r -> r (1 + t P(r w)) must be increasing for every direction w
    for (const Point& w : fibonacci_sphere(2000)) {
      for (int j = 0; j <= 40; ++j) {
        double r = j / 40.0;
        Point x = r * w;
        double d = 1.0 + amplitude * deformation_value(deformation, x) +
                   amplitude * r * dot(deformation_gradient(deformation, x), w);
        if (d <= 1e-3) throw ConfigError("perturbation amplitude too large: deformation is not injective");
      }
    }
  }
}

bool DomainSpec::rotationally_symmetric() const {
  return kind == DomainKind::UnitBall || kind == DomainKind::Ball ||
         (kind == DomainKind::PerturbedBall && amplitude == 0.0);
}

double DomainSpec::effective_radius() const { return kind == DomainKind::Ball ? radius : 1.0; }

double DomainSpec::level_set(const Point& x) const {
  switch (kind) {
    case DomainKind::UnitBall:
    case DomainKind::Ball: return norm(x) - effective_radius();
    case DomainKind::Box: {
      double v = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) v = std::max({v, -x[a], x[a] - edges[a]});
      return v;
    }
    case DomainKind::PerturbedBall: {
      double r = norm(x);
      if (r == 0.0) return -1.0;
      Point w = (1.0 / r) * x;
      return r - (1.0 + amplitude * deformation_value(deformation, w));
    }
  }
  return 0.0;
}

double DomainSpec::volume() const {
  switch (kind) {
    case DomainKind::UnitBall:
    case DomainKind::Ball: return 4.0 * kPi / 3.0 * std::pow(effective_radius(), 3);
    case DomainKind::Box: return edges[0] * edges[1] * edges[2];
    case DomainKind::PerturbedBall: {
      // (1/3) int_{S^2} (1 + t P)^3 with a product rule, Gauss in cos(theta)
      const int nt = 64, np = 128;
      const GaussRule& g = gauss_legendre(nt);
      const auto& xg = g.x;
      const auto& wg = g.w;
      double vol = 0.0;
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j) {
          double phi = 2.0 * kPi * j / np, s = std::sqrt(1.0 - xg[i] * xg[i]);
          Point w{s * std::cos(phi), s * std::sin(phi), xg[i]};
          vol += wg[i] * (2.0 * kPi / np) * std::pow(1.0 + amplitude * deformation_value(deformation, w), 3) / 3.0;
        }
      return vol;
    }
  }
  return 0.0;
}

std::string DomainSpec::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind) << ";mode=" << to_string(mode) << ";n=" << resolution;
  if (kind == DomainKind::Ball) os << ";R=" << radius;
  if (kind == DomainKind::Box) os << ";edges=" << edges[0] << "," << edges[1] << "," << edges[2];
  if (kind == DomainKind::PerturbedBall) os << ";def=" << deformation << ";t=" << amplitude;
  return os.str();
}

DiscreteDomain::DiscreteDomain(const DomainSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.mode == Mode::Radial)
    build_radial();
  else
    build_full3d();
}

void DiscreteDomain::build_radial() {
  const int n_all = spec_.resolution;
  const double R = spec_.effective_radius();
  const double h = R / (n_all - 1);
  const int n = n_all - 1;
  spacing_ = {h, h, h};
  dims_ = {n_all, 1, 1};
  nodes_.resize(n);
  index_.resize(n_all, -1);
  weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes_[i] = {i * h, 0.0, 0.0};
    index_[i] = i;
    weights_[i] = kOmega3 * (i == 0 ? h * h * h / 24.0 : (i * h) * (i * h) * h);
  }
  // finite-volume fluxes through spheres at the half nodes; u'(0) = 0 is built in
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    double rp = (i + 0.5) * h;
    double c = kOmega3 * rp * rp / h;
    trip.emplace_back(i, i, c);
    if (i + 1 < n) {
      trip.emplace_back(i + 1, i + 1, c);
      trip.emplace_back(i, i + 1, -c);
      trip.emplace_back(i + 1, i, -c);
    } else {
      arms_.push_back({i, {R, 0.0, 0.0}, c / weights_[i]});
    }
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
}

double DiscreteDomain::crossing_fraction(const Point& in, const Point& out) const {
  if (spec_.kind == DomainKind::UnitBall || spec_.kind == DomainKind::Ball) {
    // |in + s (out - in)| = R
    Point d = out - in;
    double a = dot(d, d), b = 2.0 * dot(in, d), c = dot(in, in) - std::pow(spec_.effective_radius(), 2);
    double s = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
    return std::clamp(s, 0.0, 1.0);
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (spec_.level_set(in + mid * (out - in)) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void DiscreteDomain::build_full3d() {
  const int n = spec_.resolution;
  dims_ = {n, n, n};
  if (spec_.kind == DomainKind::Box) {
    origin_ = {0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a) spacing_[a] = spec_.edges[a] / (n - 1);
  } else {
    double rmax = spec_.effective_radius();
    if (spec_.kind == DomainKind::PerturbedBall)
      for (const Point& w : fibonacci_sphere(4000))
        rmax = std::max(rmax, 1.0 + spec_.amplitude * deformation_value(spec_.deformation, w));
    rmax *= 1.0 + 1e-9;
    origin_ = {-rmax, -rmax, -rmax};
    spacing_.fill(2.0 * rmax / (n - 1));
  }
  const double cell = spacing_[0] * spacing_[1] * spacing_[2];
  const double tiny = 1e-10 * *std::min_element(spacing_.begin(), spacing_.end());
  index_.assign(static_cast<size_t>(n) * n * n, -1);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Point x = grid_point(i, j, k);
        if (spec_.level_set(x) < -tiny) {
          index_[(static_cast<size_t>(k) * n + j) * n + i] = static_cast<int>(nodes_.size());
          nodes_.push_back(x);
        }
      }
  const int m = size();
  weights_ = Eigen::VectorXd::Constant(m, cell);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(7 * static_cast<size_t>(m));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int p = index(i, j, k);
        if (p < 0) continue;
        const int ijk[3] = {i, j, k};
        double diag = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double ha2 = spacing_[a] * spacing_[a];
          for (int sgn : {-1, 1}) {
            int nb[3] = {ijk[0], ijk[1], ijk[2]};
            nb[a] += sgn;
            int q = index(nb[0], nb[1], nb[2]);
            if (q >= 0) {
              diag += 1.0 / ha2;
              trip.emplace_back(p, q, -cell / ha2);
            } else {
              // boundary arm of length theta*h; symmetric ghost-fluid weighting
              Point xo = grid_point(nb[0], nb[1], nb[2]);
              double theta = std::max(crossing_fraction(nodes_[p], xo), 1e-8);
              double coef = 1.0 / (theta * ha2);
              diag += coef;
              arms_.push_back({p, nodes_[p] + theta * (xo - nodes_[p]), coef});
            }
          }
        }
        trip.emplace_back(p, p, cell * diag);
      }
  stiffness_.resize(m, m);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
}

int DiscreteDomain::index(int i, int j, int k) const {
  if (spec_.mode == Mode::Radial) return (i >= 0 && i < dims_[0]) ? index_[i] : -1;
  const int n = dims_[0];
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return -1;
  return index_[(static_cast<size_t>(k) * n + j) * n + i];
}

Point DiscreteDomain::grid_point(int i, int j, int k) const {
  if (spec_.mode == Mode::Radial) return {i * spacing_[0], 0.0, 0.0};
  return {origin_[0] + i * spacing_[0], origin_[1] + j * spacing_[1], origin_[2] + k * spacing_[2]};
}

Eigen::SparseMatrix<double> DiscreteDomain::symmetric_operator() const {
  Eigen::VectorXd s = weights_.cwiseSqrt().cwiseInverse();
  Eigen::SparseMatrix<double> S = s.asDiagonal() * stiffness_ * s.asDiagonal();
  return S;
}

Eigen::VectorXd DiscreteDomain::apply(const Eigen::VectorXd& u) const {
  return (stiffness_ * u).cwiseQuotient(weights_);
}

Eigen::VectorXd DiscreteDomain::lift(const std::function<double(const Point&)>& g) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size());
  for (const auto& arm : arms_) b[arm.node] += arm.coef * g(arm.point);
  return b;
}

double DiscreteDomain::boundary_distance(const Point& x) const {
  const double tol = 1e-12;
  if (spec_.level_set(x) > tol) throw ConfigError("point lies outside the closed domain");
  switch (spec_.kind) {
    case DomainKind::UnitBall:
    case DomainKind::Ball: return std::max(0.0, spec_.effective_radius() - norm(x));
    case DomainKind::Box: {
      double d = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) d = std::min({d, x[a], spec_.edges[a] - x[a]});
      return std::max(0.0, d);
    }
    case DomainKind::PerturbedBall: {
      auto bpt = [&](double th, double ph) {
        Point w = spherical(th, ph);
        return (1.0 + spec_.amplitude * deformation_value(spec_.deformation, w)) * w;
      };
      double best = std::numeric_limits<double>::infinity(), bt = 0, bp = 0;
      for (const Point& w : fibonacci_sphere(2000)) {
        double th = std::acos(std::clamp(w[2], -1.0, 1.0)), ph = std::atan2(w[1], w[0]);
        double d = norm(bpt(th, ph) - x);
        if (d < best) best = d, bt = th, bp = ph;
      }
      // pattern search refinement in (theta, phi)
      for (double step = 0.05; step > 1e-10; step *= 0.5) {
        bool moved = true;
        while (moved) {
          moved = false;
          for (auto [dt, dp] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
            double d = norm(bpt(bt + dt, bp + dp) - x);
            if (d < best) best = d, bt += dt, bp += dp, moved = true;
          }
        }
      }
      return best;
    }
  }
  return 0.0;
}

const Eigen::VectorXd& DiscreteDomain::distance_field() const {
  if (!distance_) {
    Eigen::VectorXd d(size());
    for (int i = 0; i < size(); ++i) d[i] = boundary_distance(nodes_[i]);
    distance_ = std::move(d);
  }
  return *distance_;
}

int DiscreteDomain::nearest_node(const Point& x) const {
  if (spec_.mode == Mode::Radial) {
    int i = static_cast<int>(std::lround(norm(x) / spacing_[0]));
    return index(i);
  }
  int ijk[3];
  for (int a = 0; a < 3; ++a) ijk[a] = static_cast<int>(std::lround((x[a] - origin_[a]) / spacing_[a]));
  return index(ijk[0], ijk[1], ijk[2]);
}

double DiscreteDomain::interpolate(const Eigen::VectorXd& f, const Point& x,
                                   const std::function<double(const Point&)>& outside) const {
  auto value = [&](int i, int j, int k) {
    int p = index(i, j, k);
    if (p >= 0) return f[p];
    return outside ? outside(grid_point(i, j, k)) : 0.0;
  };
  if (spec_.mode == Mode::Radial) {
    const double h = spacing_[0], r = norm(x);
    const int last = dims_[0] - 1;
    int c = std::clamp(static_cast<int>(std::lround(r / h)), 1, last - 1);
    if (c + 1 > last) c = last - 1;
    auto val = [&](int i) {
      if (i < 0) i = -i;
      if (i == last && !outside) return 0.0;
      if (i == last) {
        Point w = r > 0 ? (1.0 / r) * x : Point{1, 0, 0};
        return outside((i * h) * w);
      }
      return f[i];
    };
    double s = r / h - c;
    return val(c - 1) * 0.5 * s * (s - 1.0) + val(c) * (1.0 - s * s) + val(c + 1) * 0.5 * s * (s + 1.0);
  }
  int i0[3];
  double s[3];
  for (int a = 0; a < 3; ++a) {
    double g = (x[a] - origin_[a]) / spacing_[a];
    i0[a] = std::clamp(static_cast<int>(std::floor(g)), 0, dims_[a] - 2);
    s[a] = g - i0[a];
  }
  double v = 0.0;
  for (int c = 0; c < 8; ++c) {
    int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    double w = (di ? s[0] : 1 - s[0]) * (dj ? s[1] : 1 - s[1]) * (dk ? s[2] : 1 - s[2]);
    if (w != 0.0) v += w * value(i0[0] + di, i0[1] + dj, i0[2] + dk);
  }
  return v;
}

double DiscreteDomain::interpolate_quadratic(const Eigen::VectorXd& f, const Point& x) const {
  auto lag = [](double s, double* w) {
    w[0] = 0.5 * s * (s - 1.0);
    w[1] = 1.0 - s * s;
    w[2] = 0.5 * s * (s + 1.0);
  };
  if (spec_.mode == Mode::Radial) return interpolate(f, x);
  int c[3];
  double w[3][3];
  for (int a = 0; a < 3; ++a) {
    double g = (x[a] - origin_[a]) / spacing_[a];
    c[a] = static_cast<int>(std::lround(g));
    lag(g - c[a], w[a]);
  }
  double v = 0.0;
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        int p = index(c[0] + di, c[1] + dj, c[2] + dk);
        if (p < 0) throw NumericalError("quadratic stencil leaves the interior");
        v += w[0][di + 1] * w[1][dj + 1] * w[2][dk + 1] * f[p];
      }
  return v;
}

std::string DiscreteDomain::hash() const { return content_hash(spec_.canonical()); }

struct ShiftedSolver::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>> chol;
  bool radial = false;
};

ShiftedSolver::ShiftedSolver(const DiscreteDomain& dom, double shift) : impl_(std::make_unique<Impl>()), shift_(shift) {
  Eigen::SparseMatrix<double> M = dom.stiffness();
  for (int i = 0; i < dom.size(); ++i) M.coeffRef(i, i) += shift * dom.weights()[i];
  impl_->radial = dom.mode() == Mode::Radial;
  if (impl_->radial) {
    impl_->ldlt.compute(M);
    if (impl_->ldlt.info() != Eigen::Success) throw NumericalError("factorization failed (radial operator)");
  } else {
    impl_->chol.compute(M);
    if (impl_->chol.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed: shifted operator not positive definite");
    // guards against a miscompiled or misdetected BLAS kernel silently corrupting the supernodal factor
    Eigen::VectorXd b = Eigen::VectorXd::Ones(M.rows());
    Eigen::VectorXd x = impl_->chol.solve(b);
    double res = (M * x - b).norm() / b.norm();
    if (!(res < 1e-8)) throw NumericalError("Cholesky self-check failed (relative residual " + std::to_string(res) + ")");
  }
}

ShiftedSolver::~ShiftedSolver() = default;

Eigen::VectorXd ShiftedSolver::solve(const Eigen::VectorXd& rhs) const {
  return impl_->radial ? Eigen::VectorXd(impl_->ldlt.solve(rhs)) : Eigen::VectorXd(impl_->chol.solve(rhs));
}

}  // namespace critheat
