#include "tcl/levy.hpp"

#include <cmath>

#include "tcl/errors.hpp"

namespace tcl {

void LevyComposition::validate() const {
  if (!(std::abs(rho) <= 1.0))
    throw ConfigError( "correlation rho must lie in [-1, 1]");
}

double LevyComposition::orthogonal_loading() const {
  return std::sqrt(std::max(0.0, 1.0 - rho * rho));
}

}  // namespace tcl
