#include "critheat/spectral.hpp"

#include <arpack/arpack.hpp>
#include <lapacke.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "critheat/quadrature.hpp"

namespace critheat {

namespace {

void fix_signs(Eigen::MatrixXd& V) {
  for (int k = 0; k < V.cols(); ++k) {
    double ref = k == 0 ? V.col(0).sum() : V.col(k)(0);
    if (k > 0) {
      Eigen::Index imax;
      V.col(k).cwiseAbs().maxCoeff(&imax);
      ref = V(imax, k);
    }
    if (ref < 0) V.col(k) *= -1.0;
  }
}

Spectrum radial_eigenpairs(const DiscreteDomain& dom, int K) {
  const int n = dom.size();
  const auto& Kmat = dom.stiffness();
  const auto& w = dom.weights();
  std::vector<double> d(n), e(std::max(n - 1, 1), 0.0);
  for (int i = 0; i < n; ++i) d[i] = Kmat.coeff(i, i) / w[i];
  for (int i = 0; i + 1 < n; ++i) e[i] = Kmat.coeff(i, i + 1) / std::sqrt(w[i] * w[i + 1]);
  std::vector<double> vals(n), Z(static_cast<size_t>(n) * K);
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(K));
  lapack_int m = 0;
  lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, K, 0.0, &m,
                                   vals.data(), Z.data(), n, isuppz.data());
  if (info != 0 || m != K) throw NumericalError("tridiagonal eigensolver failed", info);
  Spectrum sp;
  sp.eigenvalues.assign(vals.begin(), vals.begin() + K);
  Eigen::Map<Eigen::MatrixXd> V(Z.data(), n, K);
  sp.fields = w.cwiseSqrt().cwiseInverse().asDiagonal() * V;
  return sp;
}

Spectrum arpack_eigenpairs(const DiscreteDomain& dom, int K, double tol) {
  const a_int n = dom.size();
  const double cell = dom.weights()[0];
  ShiftedSolver solver(dom, 0.0);
  auto op = [&](const double* x, double* y) {
    Eigen::Map<const Eigen::VectorXd> xv(x, n);
    Eigen::Map<Eigen::VectorXd> yv(y, n);
    yv = solver.solve(cell * xv);
  };
  const a_int nev = K;
  const a_int ncv = std::min<a_int>(n, std::max<a_int>(2 * K + 1, K + 20));
  std::vector<double> resid(n), v(static_cast<size_t>(n) * ncv), workd(3 * static_cast<size_t>(n));
  const a_int lworkl = ncv * (ncv + 8);
  std::vector<double> workl(lworkl);
  a_int iparam[11] = {0}, ipntr[14] = {0};
  iparam[0] = 1;
  iparam[2] = 3000;
  iparam[6] = 1;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  for (auto& r : resid) r = 1.0 + 0.1 * uni(rng);
  a_int ido = 0, info = 1;
  const double arpack_tol = std::max(tol * 1e-2, 1e-14);
  while (true) {
    arpack::saupd(ido, arpack::bmat::identity, n, arpack::which::largest_algebraic, nev, arpack_tol, resid.data(), ncv,
                  v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, info);
    if (ido == -1 || ido == 1)
      op(&workd[ipntr[0] - 1], &workd[ipntr[1] - 1]);
    else
      break;
  }
  if (info < 0) throw NumericalError("ARPACK saupd failed", static_cast<double>(info));
  if (info == 1 || iparam[4] < nev)
    throw NumericalError("eigensolver did not converge (" + std::to_string(iparam[4]) + " of " +
                             std::to_string(nev) + " pairs)",
                         static_cast<double>(iparam[4]));
  std::vector<a_int> select(ncv);
  std::vector<double> dvals(nev), z(static_cast<size_t>(n) * nev);
  a_int rvec = 1;
  arpack::seupd(rvec, arpack::howmny::ritz_vectors, select.data(), dvals.data(), z.data(), n, 0.0,
                arpack::bmat::identity, n, arpack::which::largest_algebraic, nev, arpack_tol, resid.data(), ncv,
                v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, info);
  if (info != 0) throw NumericalError("ARPACK seupd failed", static_cast<double>(info));
  Eigen::MatrixXd V = Eigen::Map<Eigen::MatrixXd>(z.data(), n, nev);
  // polish: two steps of inverse subspace iteration with Rayleigh-Ritz
  const Eigen::SparseMatrix<double> S = dom.stiffness() / cell;
  Eigen::VectorXd lam(nev);
  for (int sweep = 0; sweep < 2; ++sweep) {
    Eigen::MatrixXd Y(n, nev);
    for (int k = 0; k < nev; ++k) op(V.col(k).data(), Y.col(k).data());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, nev);
    Eigen::MatrixXd H = Q.transpose() * (S * Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
    lam = es.eigenvalues();
    V = Q * es.eigenvectors();
  }
  Spectrum sp;
  sp.eigenvalues.assign(lam.data(), lam.data() + nev);
  sp.fields = V / std::sqrt(cell);
  return sp;
}

}  // namespace

Spectrum eigenpairs(const DiscreteDomain& dom, int K, double tol) {
  if (K < 1 || K > dom.size() / 4) throw ConfigError("eigenpair count must satisfy 1 <= K <= unknowns/4");
  Spectrum sp = dom.mode() == Mode::Radial ? radial_eigenpairs(dom, K) : arpack_eigenpairs(dom, K, tol);
  fix_signs(sp.fields);
  sp.tol = tol;
  sp.mode = dom.mode();
  sp.domain_hash = dom.hash();
  sp.residuals.resize(K);
  double worst = 0.0;
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd r = dom.apply(sp.fields.col(k)) - sp.eigenvalues[k] * sp.fields.col(k);
    sp.residuals[k] = std::sqrt(dom.inner(r, r)) / sp.eigenvalues[k];
    worst = std::max(worst, sp.residuals[k]);
  }
  if (worst > tol) throw NumericalError("eigenpair residual above tolerance", worst);
  return sp;
}

namespace {

struct TailModel {
  double a = 0.0, p = 0.0;
  bool radial = false;
  double radius = 1.0, volume = 1.0, lambda_k = 0.0;
};

TailModel tail_model(const DiscreteDomain& dom, const Spectrum& sp) {
  TailModel m;
  m.radial = dom.mode() == Mode::Radial;
  m.radius = dom.spec().effective_radius();
  m.volume = dom.spec().volume();
  m.lambda_k = sp.eigenvalues.back();
  const int K = sp.count();
  const int k0 = K / 2;
  // fit sup phi_k^2 ~ a lambda^p over the upper half of the computed modes
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = k0; k < K; ++k) {
    double s = sp.fields.col(k).cwiseAbs2().maxCoeff();
    double x = std::log(sp.eigenvalues[k]), y = std::log(s);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++cnt;
  }
  double p = cnt > 1 && sxx * cnt - sx * sx > 1e-12 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
  m.p = std::clamp(p, 0.0, 1.5);
  double amax = 0.0;
  for (int k = k0; k < K; ++k)
    amax = std::max(amax, sp.fields.col(k).cwiseAbs2().maxCoeff() / std::pow(sp.eigenvalues[k], m.p));
  m.a = amax;
  return m;
}

double tail_from_model(const TailModel& m, double t) {
  // counting density of eigenvalues: radial modes (k pi / R)^2, or Weyl in 3-D
  auto density = [&](double lam) {
    return m.radial ? m.radius / (2.0 * kPi * std::sqrt(lam)) : m.volume * std::sqrt(lam) / (4.0 * kPi * kPi);
  };
  auto f = [&](double lam) { return std::exp(-lam * t) * m.a * std::pow(lam, m.p) * density(lam); };
  return integrate_to_infinity(f, m.lambda_k, 1.0 / t, 1e-8);
}

}  // namespace

double kernel_tail_bound(const DiscreteDomain& dom, const Spectrum& sp, double t) {
  return tail_from_model(tail_model(dom, sp), t);
}

double tau_min(const DiscreteDomain& dom, const Spectrum& sp, double tol) {
  const TailModel m = tail_model(dom, sp);
  const double s1 = sp.fields.col(0).cwiseAbs2().maxCoeff();
  auto ok = [&](double t) { return tail_from_model(m, t) <= tol * std::exp(-sp.lambda1() * t) * s1; };
  double hi = 1.0;
  while (!ok(hi)) hi *= 2.0;
  double lo = 1e-12;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-6; ++it) {
    double mid = std::sqrt(lo * hi);
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double free_heat_kernel(double t, double r) { return std::pow(4.0 * kPi * t, -1.5) * std::exp(-r * r / (4.0 * t)); }

KernelValue heat_kernel(const DiscreteDomain& dom, const Spectrum& sp, double t, const Point& x, const Point& y,
                        double tol) {
  if (!(t > 0.0)) throw ConfigError("heat kernel time must be positive");
  if (dom.mode() == Mode::Radial && norm(x) > 0.0 && norm(y) > 0.0)
    throw ConfigError("a radial spectrum represents the heat kernel only with one point at the origin");
  KernelValue kv;
  for (int k = 0; k < sp.count(); ++k)
    kv.value += std::exp(-sp.eigenvalues[k] * t) * sp.value(dom, k, x) * sp.value(dom, k, y);
  kv.tail_bound = kernel_tail_bound(dom, sp, t);
  const double lead = std::exp(-sp.lambda1() * t) * sp.fields.col(0).cwiseAbs2().maxCoeff();
  if (kv.tail_bound > tol * lead) {
    kv.trusted = false;
    kv.warning = "t below tau_min: truncation tail not controlled";
  }
  return kv;
}

VaradhanResult varadhan_lower_check(const DiscreteDomain& dom, const Spectrum& sp, double tau, const Point& y,
                                    double delta, double tol) {
  VaradhanResult res;
  res.lower = free_heat_kernel(tau, norm(y)) * (1.0 - std::exp(-delta * delta / (4.0 * tau)));
  KernelValue kv = heat_kernel(dom, sp, tau, {0.0, 0.0, 0.0}, y, tol);
  res.kernel = kv.value;
  if (!kv.trusted) {
    res.skipped = true;
    res.warning = kv.warning;
    return res;
  }
  if (res.lower < tol) {
    res.skipped = true;
    res.pass = true;
    res.warning = "lower bound below tolerance: check is vacuous";
    return res;
  }
  res.pass = res.lower <= res.kernel + tol;
  return res;
}

void save_spectrum(const Spectrum& sp, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw NumericalError("cannot write spectrum cache " + path);
  auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
  const std::uint64_t magic = 0x43524954535045ull;
  put(magic);
  std::int64_t K = sp.count(), n = sp.fields.rows(), hl = static_cast<std::int64_t>(sp.domain_hash.size());
  std::int32_t mode = sp.mode == Mode::Radial ? 1 : 0;
  put(K), put(n), put(mode), put(sp.tol), put(hl);
  os.write(sp.domain_hash.data(), hl);
  os.write(reinterpret_cast<const char*>(sp.eigenvalues.data()), K * sizeof(double));
  os.write(reinterpret_cast<const char*>(sp.residuals.data()), K * sizeof(double));
  os.write(reinterpret_cast<const char*>(sp.fields.data()), K * n * sizeof(double));
}

std::optional<Spectrum> load_spectrum(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  auto get = [&](auto& v) { is.read(reinterpret_cast<char*>(&v), sizeof v); };
  std::uint64_t magic = 0;
  get(magic);
  if (magic != 0x43524954535045ull) return std::nullopt;
  std::int64_t K = 0, n = 0, hl = 0;
  std::int32_t mode = 0;
  Spectrum sp;
  get(K), get(n), get(mode), get(sp.tol), get(hl);
  if (!is || K <= 0 || n <= 0 || hl < 0 || hl > 4096) return std::nullopt;
  sp.domain_hash.resize(hl);
  is.read(sp.domain_hash.data(), hl);
  sp.mode = mode ? Mode::Radial : Mode::Full3d;
  sp.eigenvalues.resize(K);
  sp.residuals.resize(K);
  sp.fields.resize(n, K);
  is.read(reinterpret_cast<char*>(sp.eigenvalues.data()), K * sizeof(double));
  is.read(reinterpret_cast<char*>(sp.residuals.data()), K * sizeof(double));
  is.read(reinterpret_cast<char*>(sp.fields.data()), K * n * sizeof(double));
  if (!is) return std::nullopt;
  return sp;
}

}  // namespace critheat
