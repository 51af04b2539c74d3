#pragma once

#include <string>

#include "palletmap/tuner.hpp"

namespace palletmap {

// Named objectives for the `tune` subcommand. "quadratic" is the
// convergence smoke test; "assoc_eval" tunes the association IoU
// threshold and the detection confidence threshold against a synthetic
// warehouse fixture.
struct NamedObjective {
  ParamSpace default_space;
  ObjectiveFn fn;
};

NamedObjective make_objective(const std::string& name);

}  // namespace palletmap
