#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "critheat/domain.hpp"
#include "critheat/green.hpp"
#include "critheat/nonlocal.hpp"

namespace critheat {

enum class Scheme { StrangSplit, ImexBdf2 };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// running: horizon reached while sup |u| still grows; horizon: reached with neither growth nor decay
enum class Status { Running, Decayed, BlownUp, Horizon };
std::string to_string(Status s);

struct EvolveConfig {
  Scheme scheme = Scheme::StrangSplit;
  double dt0 = 1e-3;        // top of the dt ladder dt0 * 2^{-j}
  double dt_min = 1e-14;
  double rel_change = 0.05;  // accepted steps satisfy |u' - u|_inf <= rel_change |u|_inf
  double safety = 0.01;      // and |u|_inf^4 dt <= safety
  double m_max = 0.0;        // blow-up threshold on sup |u|; 0 selects 10 sup |u_0|
  double decay_ratio = 1e-3; // decayed once sup |u| <= decay_ratio sup |u_0|
  double horizon = 10.0;
  int record_every = 1;
  double energy_tol = 1e-9;  // relative slack on E(t_{n+1}) <= E(t_n)
  bool energy_guard = true;  // reject and halve steps that raise the energy beyond the slack
  long max_steps = 50'000'000;
  void validate() const;
};

struct Trajectory {
  std::vector<double> t, sup, mu_hat, energy, dt;
  std::vector<Point> xi;
  Status status = Status::Horizon;
  double t_end = 0.0;
  double blowup_time = 0.0;  // T_est for blown-up runs
  long steps = 0, rejected = 0;
  int energy_violations = 0;  // accepted steps with E increase beyond the slack
  double max_energy_increase = 0.0;
  Eigen::VectorXd u_final;
  std::string message;
  std::string to_csv() const;
};

// Time stepper with cached factorizations of the implicit operators.
class Integrator {
 public:
  Integrator(const DiscreteDomain& dom, Scheme scheme);
  ~Integrator();
  Eigen::VectorXd step(const Eigen::VectorXd& u, double dt);
  void reset();  // forget the multistep history
  const DiscreteDomain& domain() const { return dom_; }

 private:
  const ShiftedSolver& solver(double shift);
  const DiscreteDomain& dom_;
  Scheme scheme_;
  std::map<double, std::unique_ptr<ShiftedSolver>> cache_;
  Eigen::VectorXd prev_u_, prev_f_;
  double prev_dt_ = 0.0;
};

// Exact flow of u' = u^5 over time tau; returns false where the solution leaves the real line.
bool ode_flow(Eigen::VectorXd& u, double tau);

Trajectory evolve(const DiscreteDomain& dom, const Eigen::VectorXd& u0, const EvolveConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double ci95 = 0.0;
  double drop = 0.0;  // mu_hat(start) / mu_hat(end)
  int samples = 0;
};

// Least-squares slope of ln(1 / mu_hat) over [t_lo, t_hi].
RateFit rate_estimate(const Trajectory& tr, double t_lo, double t_hi);
// Slope of ln sup |u| over [t_lo, t_hi] (negative for decay).
RateFit log_sup_slope(const Trajectory& tr, double t_lo, double t_hi);

struct KaplanEntry {
  double alpha = 0.0;
  Status status = Status::Horizon;
  double t_end = 0.0;
  double blowup_time = 0.0;
  double decay_rate = 0.0;  // -d/dt ln sup |u| over the second half of a decayed run
  double kaplan_y0 = 0.0;   // int u_0 psi with psi = phi / int phi
  bool kaplan_guaranteed = false;
  int energy_violations = 0;
};

struct KaplanResult {
  std::vector<KaplanEntry> entries;
  bool monotone = true;  // no decay above a blow-up
  std::optional<std::pair<double, double>> bracket;  // (alpha_decay, alpha_blow), adjacent in the sweep
  double kaplan_threshold = 0.0;                      // lambda_1^{1/4}
};

// Kaplan: for y = int u psi, y' >= -lambda_1 y + y^5, so y(0) > lambda_1^{1/4} forces blow-up.
KaplanResult kaplan_dichotomy(const DiscreteDomain& dom, const Eigen::VectorXd& phi, double lambda1,
                              const std::vector<double>& alphas, const EvolveConfig& cfg, int jobs = 1);

struct EdgeOptions {
  double bisect_tol = 1e-10;   // relative sup distance of the bracketing states after bisection
  double separation = 1e-3;    // re-bisect once the pair has drifted this far apart
  // trial classification relative to sup at the trial start; wide enough that the slow growth of the edge
  // state itself cannot trigger it before a trial departs
  double up = 3.0, down = 0.5;
  double trial_horizon = 2.0;
  double t_end = 1.0;
  int max_stages = 100000;
  int max_bisections = 80;
  std::function<void(int stage, double t, double mu_hat, long trials)> progress;  // called after each stage
};

struct ThresholdResult {
  double alpha_decay = 0.0, alpha_blow = 0.0;  // amplitude bracket at t = 0
  int stages = 0, bisections = 0;
  long trials = 0;
  Trajectory edge;  // decay-side state of the bracketing pair, stitched across stages
};

// Edge tracking: bisect between a decaying and a blowing-up state, advance the pair until it separates,
// then bisect again. The decay-side state shadows the threshold solution.
ThresholdResult track_threshold(const DiscreteDomain& dom, const Eigen::VectorXd& profile, double alpha_decay,
                                double alpha_blow, const EvolveConfig& cfg, const EdgeOptions& eo = {});

// Window on which the edge run shadows the threshold solution: from the first time mu_hat falls below
// start_frac mu_hat(0) up to the mu_hat minimum, trimmed by trim of its length at the end.
std::pair<double, double> edge_window(const Trajectory& tr, double start_frac = 0.9, double trim = 0.1);

struct LinearConfig {
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  std::vector<Point> probes;
  int record_every = 1;
};

struct LinearTrajectory {
  std::vector<double> t, sup;
  std::vector<std::vector<double>> probe;  // probe[j][n]
  Eigen::VectorXd v_final;
};

// BDF2 for v_t = Delta v + gamma v + f(t), zero initial and boundary data.
LinearTrajectory linear_inhomogeneous(const DiscreteDomain& dom, double lambda1, double gamma,
                                      const std::function<Eigen::VectorXd(double)>& f, const LinearConfig& cfg);

// Nodal G_gamma(., q) = alpha_3 / r - H_gamma(., q); the node at q carries the cell average of alpha_3 / r.
Eigen::VectorXd green_field(const DiscreteDomain& dom, const GreenData& g);

// v(q, t) for v_t = Delta v + gamma v - Lambda'(t) G_gamma(., q), sampled on the grid of lambda_dot.
TimeSeries forward_map_pde(const DiscreteDomain& dom, const Spectrum& sp, double gamma, const Point& q,
                           const TimeSeries& lambda_dot, int substeps = 8);

}  // namespace critheat
