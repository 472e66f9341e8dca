#pragma once

#include <optional>
#include <string>
#include <vector>

#include "critheat/domain.hpp"
#include "critheat/evolve.hpp"
#include "json.hpp"

namespace critheat {

using Json = nlohmann::json;

struct NonlocalParams {
  double l1 = 2.0 / 3.0;
  double t0 = 1.0;
  double t_end = 6.0;
  double dt = 0.0078125;
  double compare_end = 5.0;
  double abscissa_frac = 0.8;
  double bromwich_tol = 1e-6;
  double tau_lo = 1e-6, tau_hi = 1.0;
  int tau_count = 60;
  bool pde_oracle = true;
};

struct AnsatzParams {
  std::vector<double> mus{1e-2, 1e-3, 1e-4};
  double gamma_factor = 1.0;  // gamma = factor * gamma*(q) when "gamma" is unset
};

struct InitialDatum {
  std::string kind = "phi1";  // phi1 | u1
  double amplitude = 1.0;
  double mu0 = 0.05;
};

struct MapParams {
  Point direction{1, 0, 0};
  int count = 9;
  double max_fraction = 0.8;  // largest sample radius, fraction of the distance to the boundary
};

struct ThresholdParams {
  std::vector<double> alphas{0.01, 0.5, 1.0, 2.0, 3.0, 5.0};
  bool edge = false;
  double alpha_lo = 0.5, alpha_hi = 1.5;
  double t_end = 0.2;
  double bisect_tol = 1e-10;
  double separation = 1e-3;
};

struct RunConfig {
  std::string command;
  DomainSpec domain;
  int K = 16;
  double eig_tol = 1e-8;
  std::optional<double> gamma;
  std::vector<double> gammas{0.5, 1.0, 2.0, 4.0, 6.0, 8.0};
  Point q{0, 0, 0};
  std::vector<Point> points;  // map samples; generated along map.direction when empty
  MapParams map;
  NonlocalParams nonlocal;
  AnsatzParams ansatz;
  EvolveConfig evolve;
  InitialDatum initial;
  std::optional<std::pair<double, double>> rate_window;
  ThresholdParams threshold;
  std::string output = ".";
  std::string cache = "on";  // on | off | refresh
  int jobs = 1;

  static RunConfig from_json(const Json& j);
  Json to_json() const;
  std::string canonical() const;  // compact dump of to_json()
  // Hash of the result-determining fields (output, cache policy and jobs excluded).
  std::string hash() const;
  void validate() const;
};

const std::vector<std::string>& command_names();

RunConfig load_config(const std::string& path);
// Applies "a.b.c=value" with value parsed as JSON when possible, else taken as a string.
void apply_override(Json& j, const std::string& assignment);

}  // namespace critheat
