#pragma once
#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "survitr/data_model.hpp"

namespace survitr {

// Right-continuous step function; `initial` is the value before the first
// knot (1 for survival curves, 0 for cumulative hazards).
struct StepCurve {
  std::vector<double> knots;   // strictly increasing
  std::vector<double> values;  // value on [knots[k], knots[k+1})
  double initial = 1.0;

  // Right-continuous value at t.
  double at(double t) const;
  // Left limit at t (value just before t).
  double left_at(double t) const;
};

// Conditional survival function of the censoring distribution.
class CensorSurvival {
 public:
  virtual ~CensorSurvival() = default;
  // S_C(t | x, a), right-continuous in t.
  virtual double survival(double t, const Eigen::VectorXd& x, int arm) const = 0;
  // S_C(t- | x, a) = pr(C >= t | x, a) for continuous C.
  virtual double survival_left(double t, const Eigen::VectorXd& x, int arm) const = 0;
};

// Product-limit estimator per arm, treating censoring (event == 0) as the
// event of interest.
class KaplanMeierCensor : public CensorSurvival {
 public:
  double survival(double t, const Eigen::VectorXd& x, int arm) const override;
  double survival_left(double t, const Eigen::VectorXd& x, int arm) const override;

  const StepCurve& curve(int arm) const;
  // One CSV per arm: time,survival rows.
  void write_curves_csv(const std::string& path_prefix) const;

  StepCurve treated;
  StepCurve control;
};

KaplanMeierCensor fit_km(const Dataset& data);

// Which columns enter the censoring Cox model design.
struct CoxDesign {
  bool include_arm = true;
  bool include_interactions = true;
};

// Cox proportional hazards fit for the censoring hazard with Breslow tie
// handling and Breslow baseline cumulative hazard.
class CoxCensor : public CensorSurvival {
 public:
  double survival(double t, const Eigen::VectorXd& x, int arm) const override;
  double survival_left(double t, const Eigen::VectorXd& x, int arm) const override;

  Eigen::VectorXd design_row(const Eigen::VectorXd& x, int arm) const;

  CoxDesign design;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd column_means;  // centering applied before exp()
  StepCurve baseline_cumhaz;     // Breslow, on centered design
  int iterations = 0;
  double grad_norm = 0.0;
};

CoxCensor fit_cox(const Dataset& data, const CoxDesign& design = {});

}  // namespace survitr
