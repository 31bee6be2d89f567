#include "crashsynth/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace crashsynth {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "sat";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Timeout: return "timeout";
  }
  return "infeasible";
}

std::uint64_t stable_hash(const std::string& s) {
  // FNV-1a, stable across runs and platforms.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Residualizer {
  const ConstraintSet& set;
  const SolverConfig& cfg;

  double residual(const Relation& r, const std::vector<double>& z) const {
    double v = r.expr.eval(z);
    if (r.kind == RelationKind::Equality) return v;
    // Hinge: zero once the inequality clears the interior target margin.
    return std::max(0.0, cfg.target_margin - v);
  }

  void all(const std::vector<double>& z, Eigen::VectorXd& out) const {
    const auto& rels = set.relations();
    for (std::size_t i = 0; i < rels.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = residual(rels[i], z);
    }
  }
};

struct Satisfaction {
  double max_eq = 0.0;
  double min_ineq = 1e300;
  bool ok = false;
};

Satisfaction check_satisfaction(const ConstraintSet& set, const SolverConfig& cfg,
                                const std::vector<double>& z) {
  Satisfaction s;
  bool has_ineq = false;
  for (const Relation& r : set.relations()) {
    double v = r.expr.eval(z);
    if (r.kind == RelationKind::Equality) {
      s.max_eq = std::max(s.max_eq, std::abs(v));
    } else {
      has_ineq = true;
      s.min_ineq = std::min(s.min_ineq, v);
    }
  }
  if (!has_ineq) s.min_ineq = 1.0;
  s.ok = s.max_eq <= cfg.equality_accept && s.min_ineq >= cfg.target_margin * 0.5;
  return s;
}

}  // namespace

SolveOutcome LeastSquaresBackend::solve(const ConstraintSet& set, const SolverConfig& cfg) {
  const auto& vars = set.variables();
  const auto& rels = set.relations();
  const int n = static_cast<int>(vars.size());
  const int m = static_cast<int>(rels.size());

  SolveOutcome out;

  // Empty variable bounds make the whole system trivially unsatisfiable; the
  // builder encodes impossible speed boxes this way.
  for (const VariableInfo& v : vars) {
    if (v.lower > v.upper) {
      out.status = SolveStatus::Infeasible;
      out.conflicting.push_back("variable " + v.name);
      return out;
    }
  }
  if (n == 0 || m == 0) {
    // Constant relations may still be violated.
    std::vector<double> empty(static_cast<std::size_t>(n), 0.0);
    Satisfaction s = check_satisfaction(set, cfg, empty);
    out.max_equality_violation = s.max_eq;
    out.min_inequality_value = s.min_ineq;
    out.status = s.ok ? SolveStatus::Sat : SolveStatus::Infeasible;
    out.model = empty;
    return out;
  }

  // Per-variable relation dependency lists for sparse Jacobian columns.
  std::vector<std::vector<int>> affected(static_cast<std::size_t>(n));
  for (int ri = 0; ri < m; ++ri) {
    for (int vi : rels[static_cast<std::size_t>(ri)].variables) {
      affected[static_cast<std::size_t>(vi)].push_back(ri);
    }
  }

  Residualizer res{set, cfg};
  std::mt19937_64 rng(cfg.seed ^ stable_hash(set.name()));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(cfg.timeout_s));

  std::vector<double> best_z;
  double best_score = 1e300;
  Satisfaction best_sat;
  bool timed_out = false;

  std::vector<double> z(static_cast<std::size_t>(n));
  Eigen::VectorXd r(m), r_try(m);
  Eigen::MatrixXd jac(m, n);

  for (int restart = 0; restart <= cfg.max_restarts; ++restart) {
    if (Clock::now() >= deadline) {
      timed_out = true;
      break;
    }
    out.restarts_used = restart;

    // Seeded start, increasingly jittered on later restarts.
    double spread = restart == 0 ? 0.0 : 0.5 * restart;
    for (int i = 0; i < n; ++i) {
      const VariableInfo& v = vars[static_cast<std::size_t>(i)];
      double x = v.seed + spread * v.jitter * unit(rng);
      z[static_cast<std::size_t>(i)] = std::clamp(x, v.lower, v.upper);
    }

    double lambda = 1e-3;
    res.all(z, r);
    double cost = r.squaredNorm();

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
      if (Clock::now() >= deadline) {
        timed_out = true;
        break;
      }
      ++out.iterations;

      Satisfaction sat = check_satisfaction(set, cfg, z);
      double score = sat.max_eq + std::max(0.0, cfg.target_margin - sat.min_ineq);
      if (score < best_score) {
        best_score = score;
        best_z = z;
        best_sat = sat;
      }
      if (sat.ok) break;

      // Central-difference Jacobian, only re-evaluating relations that depend
      // on the perturbed variable; falls back to one-sided at the bounds.
      jac.setZero();
      for (int j = 0; j < n; ++j) {
        const VariableInfo& v = vars[static_cast<std::size_t>(j)];
        double saved = z[static_cast<std::size_t>(j)];
        double h = 1e-6 * std::max(1.0, std::abs(saved));
        double hi = std::min(saved + h, v.upper);
        double lo = std::max(saved - h, v.lower);
        if (hi == lo) continue;
        for (int ri : affected[static_cast<std::size_t>(j)]) {
          z[static_cast<std::size_t>(j)] = hi;
          double r_hi = res.residual(rels[static_cast<std::size_t>(ri)], z);
          z[static_cast<std::size_t>(j)] = lo;
          double r_lo = res.residual(rels[static_cast<std::size_t>(ri)], z);
          jac(ri, j) = (r_hi - r_lo) / (hi - lo);
        }
        z[static_cast<std::size_t>(j)] = saved;
      }

      Eigen::MatrixXd jtj = jac.transpose() * jac;
      Eigen::VectorXd jtr = jac.transpose() * r;
      bool stepped_ok = false;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd damped = jtj;
        damped.diagonal().array() += lambda;
        Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
        if (!delta.allFinite()) {
          lambda *= 10.0;
          continue;
        }

        // Active-set refinement: a plain clamp of the unconstrained step
        // degrades to linear convergence once a variable sits at its bound.
        // Pin the clamped variables to their bound displacement and re-solve
        // for the free ones.
        bool any_clamped = false;
        Eigen::VectorXd fixed(n);
        for (int j = 0; j < n; ++j) {
          const VariableInfo& v = vars[static_cast<std::size_t>(j)];
          const double target = z[static_cast<std::size_t>(j)] + delta[j];
          if (target < v.lower || target > v.upper) {
            fixed[j] = std::clamp(target, v.lower, v.upper) - z[static_cast<std::size_t>(j)];
            any_clamped = true;
          } else {
            fixed[j] = std::numeric_limits<double>::quiet_NaN();
          }
        }
        if (any_clamped) {
          Eigen::MatrixXd sys = damped;
          Eigen::VectorXd rhs = -jtr;
          for (int j = 0; j < n; ++j) {
            if (std::isnan(fixed[j])) continue;
            rhs -= sys.col(j) * fixed[j];
            sys.col(j).setZero();
            sys.row(j).setZero();
            sys(j, j) = 1.0;
            rhs[j] = fixed[j];
          }
          Eigen::VectorXd refined = sys.ldlt().solve(rhs);
          if (refined.allFinite()) delta = refined;
        }

        std::vector<double> z_try(z);
        for (int j = 0; j < n; ++j) {
          const VariableInfo& v = vars[static_cast<std::size_t>(j)];
          z_try[static_cast<std::size_t>(j)] =
              std::clamp(z[static_cast<std::size_t>(j)] + delta[j], v.lower, v.upper);
        }
        res.all(z_try, r_try);
        double cost_try = r_try.squaredNorm();
        if (cost_try < cost) {
          z = std::move(z_try);
          r = r_try;
          cost = cost_try;
          lambda = std::max(lambda * 0.3, 1e-12);
          stepped_ok = true;
          break;
        }
        lambda *= 10.0;
      }
      if (!stepped_ok) break;  // stuck; try the next restart
      if (cost < 1e-24) break;
    }

    // The last step of the loop may have produced the best point.
    Satisfaction sat_end = check_satisfaction(set, cfg, z);
    double score_end = sat_end.max_eq + std::max(0.0, cfg.target_margin - sat_end.min_ineq);
    if (score_end < best_score) {
      best_score = score_end;
      best_z = z;
      best_sat = sat_end;
    }

    if (!best_z.empty() && best_sat.ok) break;
    if (timed_out) break;
  }

  out.max_equality_violation = best_sat.max_eq;
  out.min_inequality_value = best_sat.min_ineq;
  if (!best_z.empty() && best_sat.ok) {
    out.status = SolveStatus::Sat;
    out.model = std::move(best_z);
    return out;
  }

  if (timed_out) {
    out.status = SolveStatus::Timeout;
    return out;
  }

  out.status = SolveStatus::Infeasible;
  if (!best_z.empty()) {
    // Report which groups still fail at the closest attempt.
    std::set<std::string> groups;
    for (const Relation& rel : rels) {
      double v = rel.expr.eval(best_z);
      bool bad = rel.kind == RelationKind::Equality ? std::abs(v) > cfg.eps
                                                    : v < cfg.ineq_margin;
      if (bad) {
        groups.insert("group" + std::to_string(rel.tag.group) + ":" + rel.tag.label);
      }
    }
    out.conflicting.assign(groups.begin(), groups.end());
  }
  return out;
}

SolveOutcome solve(const ConstraintSet& set, const SolverConfig& config) {
  LeastSquaresBackend backend;
  return backend.solve(set, config);
}

}  // namespace crashsynth
