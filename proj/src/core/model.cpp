#include "rcising/model.hpp"

#include "rcising/error.hpp"

namespace rci {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::free: return "free";
    case Boundary::plus: return "plus";
    case Boundary::minus: return "minus";
  }
  return "unknown";
}

std::string to_string(FkBoundary b) { return b == FkBoundary::free ? "free" : "wired"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "free") return Boundary::free;
  if (name == "plus") return Boundary::plus;
  if (name == "minus") return Boundary::minus;
  fail(ErrorCode::invalid_argument, "unknown boundary condition '" + name + "'");
}

FkBoundary fk_boundary_from_string(const std::string& name) {
  if (name == "free") return FkBoundary::free;
  if (name == "wired") return FkBoundary::wired;
  fail(ErrorCode::invalid_argument, "unknown FK boundary '" + name + "'");
}

}  // namespace rci
