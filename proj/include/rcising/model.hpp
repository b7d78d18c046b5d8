#pragma once

#include <string>

namespace rci {

/// Exterior spins: free (0), plus (+1), minus (-1). Realized through the
/// ghost vertex: the ghost pairs act as an external field of sign tau.
enum class Boundary { free, plus, minus };

/// FK boundary: free ignores the ghost, wired treats every cluster touching
/// the ghost as one cluster.
enum class FkBoundary { free, wired };

std::string to_string(Boundary b);
std::string to_string(FkBoundary b);
Boundary boundary_from_string(const std::string& name);
FkBoundary fk_boundary_from_string(const std::string& name);

inline double boundary_sign(Boundary b) {
  switch (b) {
    case Boundary::plus: return 1.0;
    case Boundary::minus: return -1.0;
    default: return 0.0;
  }
}

}  // namespace rci
