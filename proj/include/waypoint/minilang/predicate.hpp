#pragma once

// A synthesized early-reject predicate: a boolean condition attached to a
// program point. Instrumentation turns each predicate into a guard statement;
// at run time an input failing the guard is rejected immediately.

#include <string>
#include <vector>

#include "waypoint/minilang/point.hpp"

namespace waypoint::minilang {

struct Predicate {
  std::string id;          // unique per patch, e.g. "wp1"
  ProgramPoint location;
  std::string condition;   // source text of the boolean expression

  // How the predicate came to be; informational only.
  std::string hypothesis;
  int iteration = 0;
  std::string backend;
};

using PredicateSet = std::vector<Predicate>;

}  // namespace waypoint::minilang
