#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "survitr/objectives.hpp"

namespace survitr {

struct SolverConfig {
  double rho = 1.0;          // proximal weight, penalty 1/(2 rho)
  double eps_active = 1e-3;  // active-set slack
  int sample_increment = 0;  // per-iteration draws; 0 -> max(32, ceil(n/20))
  int max_outer = 200;
  double tol_step = 1e-5;    // scaled by (1 + ||beta||)
  double inner_tol = 1e-7;   // scaled by (1 + |subproblem value|)
  int inner_max_iter = 500;
  std::uint64_t seed = 0;
  bool identity_sampling = false;  // I_nu = full index set every iteration

  void validate() const;
  int resolved_increment(int n) const;
};

struct IterationRecord {
  int sample_size = 0;        // N_nu
  int active_size = 0;
  double value_before = 0.0;  // sampled objective at beta^(nu)
  double value_after = 0.0;   // sampled objective at beta^(nu+1)
  double step_norm = 0.0;
  double prox_term = 0.0;     // ||step||^2 / (2 rho)
};

struct FitResult {
  Eigen::VectorXd beta;
  double inner_scalar = 0.0;  // attaining alpha (cvar) or c (bpoe); 0 for mean
  std::vector<IterationRecord> trace;
  bool converged = false;
  std::string stop_reason;
  double objective = 0.0;   // full-data value at the final beta
  SolverConfig config;      // echoed for replay

  std::string to_json() const;
};

struct ProxResult {
  Eigen::VectorXd beta;
  double grad_norm = 0.0;
  double tolerance = 0.0;  // resolved (scaled) gradient tolerance
  int iterations = 0;
  bool converged = false;
};

// Minimize model(beta) + ||beta - beta_ref||^2 / (2 rho) to the gradient
// tolerance; deterministic, starts at beta_ref, never increases the
// objective along the way.
ProxResult solve_prox_subproblem(const ConvexModel& model,
                                 const Eigen::VectorXd& beta_ref, double rho,
                                 double inner_tol, int max_iter);

// Sampling-based proximal DC iteration with the epsilon-active multi-
// subproblem update; deterministic given cfg.seed.
FitResult fit_sampled(const DcObjective& obj, const SolverConfig& cfg,
                      const Eigen::VectorXd& beta0 = Eigen::VectorXd());

// Full-data variant: the index set is fixed to the whole sample every
// iteration, no resampling.
FitResult fit_deterministic(const DcObjective& obj, const SolverConfig& cfg,
                            const Eigen::VectorXd& beta0 = Eigen::VectorXd());

// Knot attaining the full-data inner minimum at beta; smallest scalar under
// ties.  Returns 0 for the mean criterion (no inner variable).
double extract_inner_scalar(const DcObjective& obj,
                            const Eigen::VectorXd& beta);

}  // namespace survitr
