#pragma once

#include "critheat/domain.hpp"

inline critheat::DiscreteDomain radial(int n) {
  critheat::DomainSpec s;
  s.mode = critheat::Mode::Radial;
  s.resolution = n;
  return critheat::DiscreteDomain(s);
}
