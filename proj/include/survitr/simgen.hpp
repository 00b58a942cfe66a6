#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "survitr/data_model.hpp"
#include "survitr/rng.hpp"

namespace survitr {

enum class ScenarioId { s1, s2, s3, illustrative };

ScenarioId scenario_from_string(const std::string& name);
std::string to_string(ScenarioId id);

enum class ErrorDist { normal, weibull, lognormal };

// Generator parameters for one scenario.  The factory locks horizon, error
// law and the AFT / censoring-model coefficients per scenario; they are not
// meant to be edited afterwards.
struct ScenarioSpec {
  ScenarioId id = ScenarioId::s1;
  int n = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;

  ErrorDist error_dist = ErrorDist::normal;
  double error_p1 = 0.0;  // normal mu / weibull scale / lognormal mu
  double error_p2 = 1.0;  // normal sd / weibull shape / lognormal sd

  // log T = aft_intercept + x.aft_x + (aft_trt_intercept + x.aft_trt_x) * a + eps
  double aft_intercept = 0.0;
  Eigen::Vector3d aft_x = Eigen::Vector3d::Zero();
  double aft_trt_intercept = 0.0;
  Eigen::Vector3d aft_trt_x = Eigen::Vector3d::Zero();

  // Censoring hazard lambda_0(t) * exp(linear predictor), lambda_0(t) = t^{-1/2}/2.
  double cox_intercept = 0.0;
  Eigen::Vector3d cox_x = Eigen::Vector3d::Zero();
  double cox_trt_intercept = 0.0;
  Eigen::Vector3d cox_trt_x = Eigen::Vector3d::Zero();
};

ScenarioSpec make_scenario(ScenarioId id, int n, std::uint64_t seed);

// Inverse cumulative-hazard draw for the scenarios' censoring model:
// Lambda_0(t) = sqrt(t), so C = (E * exp(-linpred))^2 with E ~ Exp(1).
double censoring_from_exponential(double linpred, double exp_unit);

// AFT linear predictor (without the error term) and its treatment half.
double aft_linear_predictor(const ScenarioSpec& spec, const Eigen::Vector3d& x, int a);
double treatment_linear_term(const ScenarioSpec& spec, const Eigen::Vector3d& x);
double censoring_linear_predictor(const ScenarioSpec& spec, const Eigen::Vector3d& x, int a);

// Draw a full observed dataset (covariates, arm, follow-up, event flag).
// Deterministic given (spec, spec.seed).
Dataset generate(const ScenarioSpec& spec);

// Two-group example: binary group covariate (1 = male, 0 = female, balanced),
// log T ~ per-cell normal error, no censoring.
Dataset generate_illustrative(int n, std::uint64_t seed);

using RuleFn = std::function<int(const Eigen::VectorXd&)>;

// Potential outcomes T under A = rule(X) on a fresh covariate draw; no
// censoring.  Used by the empirical value functions.
std::vector<double> generate_potential_outcomes(const ScenarioSpec& spec,
                                                const RuleFn& rule, int n_test,
                                                std::uint64_t seed);

// Horizon used for the illustrative example (its outcomes are untruncated in
// practice; the value is large enough that truncation never binds).
inline constexpr double kIllustrativeHorizon = 1e4;

}  // namespace survitr
