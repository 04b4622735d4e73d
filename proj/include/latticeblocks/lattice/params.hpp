#pragma once

#include <string>
#include <string_view>

#include "latticeblocks/errors.hpp"
#include "latticeblocks/lattice/stencil.hpp"

namespace latticeblocks::lattice {

enum class Precision { SP, DP };

inline std::string_view to_string(Precision p) { return p == Precision::SP ? "sp" : "dp"; }

inline Precision parse_precision(std::string_view s) {
  if (s == "sp") return Precision::SP;
  if (s == "dp") return Precision::DP;
  throw ConfigError("unknown precision '" + std::string(s) + "' (expected sp or dp)");
}

inline std::size_t scalar_size(Precision p) { return p == Precision::SP ? 4 : 8; }

struct LbmParams {
  double tau = 0.8;
  double rho0 = 1.0;
  Precision precision = Precision::DP;

  // nu = (tau - 1/2) cs^2 with dt = 1
  double viscosity() const { return (tau - 0.5) * D3Q19::cs2; }

  void validate() const {
    if (!(tau > 0.5)) throw ConfigError("tau must be > 0.5 for positive viscosity, got " + std::to_string(tau));
    if (!(rho0 > 0.0)) throw ConfigError("rho0 must be positive");
  }
};

}  // namespace latticeblocks::lattice
