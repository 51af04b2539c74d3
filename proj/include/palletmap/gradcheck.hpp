#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "palletmap/losses.hpp"

namespace palletmap {

struct GradCheckReport {
  std::string loss;
  int samples = 0;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central finite differences (step h) against the analytic gradients of
// every loss, at randomly drawn non-degenerate configurations. Simplex-
// constrained inputs (ce, dfl) are checked along tangent directions so
// the perturbed points stay valid.
std::vector<GradCheckReport> run_gradient_checks(int samples_per_loss,
                                                 std::uint64_t seed,
                                                 double h = 1e-5,
                                                 double tol = 1e-4);

std::string grad_check_to_json(const std::vector<GradCheckReport>& reports);

}  // namespace palletmap
