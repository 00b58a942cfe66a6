#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "survitr/censor_est.hpp"
#include "survitr/data_model.hpp"
#include "survitr/simgen.hpp"

namespace survitr {

double empirical_v_mean(std::span<const double> t);

// Quantile-restricted mean: mean of T I{T <= Q} with Q the smallest order
// statistic T_(k) satisfying k/n > gamma.
double empirical_v1(std::span<const double> t, double gamma);

struct CvarOracleResult {
  double value = 0.0;
  double alpha = 0.0;  // attaining threshold
};

// Independent route to empirical_v1: scans every candidate threshold,
// counts the covered mass by brute force and averages the covered values.
CvarOracleResult cvar_oracle(std::span<const double> t, double gamma);

// Rockafellar-style weighted knot search:
//   sup_alpha { alpha * gamma * mean(w) - (1/n) sum w_i (alpha - t_i)_+ }.
// With unit weights this is the tail-mass-exact CVaR form used inside the
// fitted objectives and the IPW metric below.
CvarOracleResult cvar_sup_weighted(std::span<const double> t,
                                   std::span<const double> w, double gamma);

struct BpoeOracleResult {
  double value = 0.0;  // buffered survival probability, in [0,1]
  double c = 0.0;      // attaining inner variable
  double inner = 1.0;  // attained inner minimum
};

// V2 = 1 - min over c in {0} u {1/(t_j - tau) : t_j > tau} of
// mean[max(0, c(tau - t) + 1)]; boundary branches 1 for tau <= min(t) and
// 0 for tau > mean(t).
BpoeOracleResult bpoe_oracle(std::span<const double> t, double tau);

// Plain exceedance fraction P(T > q) at the scan solution of
// mean(T | T <= q) = tau; the buffered probability upper-bounds it.
double exceedance_at_adjusted_threshold(std::span<const double> t, double tau);

struct EvalReport {
  double v_mean = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double gamma = 0.5;
  double tau = 0.5;
  int n_test = 0;
};

EvalReport evaluate_rule_simulation(const ScenarioSpec& spec, const RuleFn& rule,
                                    double gamma, double tau, int n_test,
                                    std::uint64_t seed);

struct IpwMetrics {
  double v_mean = 0.0;  // larger is better
  double v1 = 0.0;      // larger is better
  double m2 = 0.0;      // smaller is better
};

// Cross-validated IPW estimators on held-out data; alpha_hat / c_hat come
// from the corresponding fits and s_hat from the training folds.
IpwMetrics evaluate_rule_ipw(const Dataset& data, const RuleFn& rule,
                             const CensorSurvival& s_hat, double gamma,
                             double tau, double alpha_hat, double c_hat);

struct ReplicationStats {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

ReplicationStats summarize(std::span<const double> values);

}  // namespace survitr
