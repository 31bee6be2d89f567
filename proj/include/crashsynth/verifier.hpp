#pragma once

#include <string>
#include <vector>

#include "crashsynth/scenario.hpp"
#include "crashsynth/solver.hpp"

namespace crashsynth {

struct VerifyIssue {
  int group = 0;            // constraint group 1..5
  std::string participant;  // empty for cross-participant checks
  std::string label;
  double value = 0.0;  // measured violation magnitude (residual or margin)
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyIssue> issues;

  bool ok() const { return issues.empty(); }
};

// Re-checks every group 1-5 property of a solved scenario directly from the
// stored geometry: region membership, forward direction, curvature signs,
// road-orientation constants, speed/displacement consistency, chaining,
// crash coincidence, collision-area membership, simultaneity and the
// relative-heading band. Equalities must hold within config.eps, inequalities
// strictly (margin above config.ineq_margin). Shares no code with the solver
// backend; everything is evaluated with plain vector geometry.
VerifyReport verify_scenario(const ReconstructedScenario& s, const SolverConfig& config);

// Failure-report bucket for one issue: "crash-type mismatch" for crash angle
// violations, "crossing" for region/corridor escapes, otherwise
// "trajectory-planning failure".
std::string issue_bucket(const VerifyIssue& issue);

}  // namespace crashsynth
