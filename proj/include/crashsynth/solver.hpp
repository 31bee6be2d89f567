#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crashsynth/constraint_set.hpp"

namespace crashsynth {

struct SolverConfig {
  // Trajectory shape.
  int waypoints_default = 5;
  int waypoints_follow_lane = 3;
  double dt_min = 0.1;
  double dt_max = 10.0;

  // Physical envelope.
  double speed_min = 0.1;            // smallest admissible trajectory speed
  double speed_cap = 40.0;           // absolute variable bound, above any limit
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  double pedestrian_speed_max = 2.0;
  double min_collision_area = 1.0;   // m^2

  // Verification tolerances.
  double eps = 1e-6;                 // equality tolerance
  double ineq_margin = 1e-9;         // strict inequality margin

  // Simulation-level validation.
  double replay_dt = 0.05;
  double simultaneity_tol_s = 0.5;
  double oracle_v_min = 0.5;

  // Backend behaviour.
  double timeout_s = 30.0;
  std::uint64_t seed = 42;
  int max_restarts = 16;
  int max_iterations = 350;
  // Inequalities are driven to at least this interior margin so the strict
  // checks above hold with headroom.
  double target_margin = 1e-3;
  // Equalities are driven below this before a model is accepted.
  double equality_accept = 1e-9;
};

enum class SolveStatus { Sat, Infeasible, Timeout };

std::string to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> model;  // one value per variable when Sat
  int restarts_used = 0;
  int iterations = 0;
  double max_equality_violation = 0.0;
  double min_inequality_value = 0.0;
  // Constraint groups violated at the best attempt; a best-effort conflict
  // hint, not a minimal core.
  std::vector<std::string> conflicting;
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SolveOutcome solve(const ConstraintSet& set, const SolverConfig& config) = 0;
  virtual std::string name() const = 0;
};

// Damped least-squares solver: equalities as residuals, inequalities as hinge
// penalties, Levenberg-Marquardt steps with numeric Jacobians, deterministic
// seeded restarts around the structure-aware variable seeds.
class LeastSquaresBackend : public SolverBackend {
 public:
  SolveOutcome solve(const ConstraintSet& set, const SolverConfig& config) override;
  std::string name() const override { return "least_squares"; }
};

// Solves with the default backend.
SolveOutcome solve(const ConstraintSet& set, const SolverConfig& config);

// Stable string hash for decorrelating per-problem seeds.
std::uint64_t stable_hash(const std::string& s);

}  // namespace crashsynth
