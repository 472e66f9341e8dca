#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "critheat/config.hpp"
#include "critheat/spectral.hpp"

namespace critheat {

struct CommandResult {
  Json summary;
  // (suffix, content): written as <command>-<hash><suffix>
  std::vector<std::pair<std::string, std::string>> files;
};

// Cache root: $CRITHEAT_CACHE if set, else <output>/.critheat-cache.
std::string cache_root(const RunConfig& cfg);
// Eigenpairs through the content-addressed cache (policy from cfg.cache).
Spectrum cached_spectrum(const DiscreteDomain& dom, int K, double tol, const RunConfig& cfg);

CommandResult execute(const RunConfig& cfg);

// Runs the command and writes its artifacts. Returns 0, 2 (invalid config) or 3 (numerical failure);
// failures write a JSON error record.
int run_command(const RunConfig& cfg, std::ostream& log);

}  // namespace critheat
