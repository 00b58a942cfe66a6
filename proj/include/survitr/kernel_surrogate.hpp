#pragma once
#include <Eigen/Core>
#include <string>

namespace survitr {

// Gaussian Gram matrix K_ij = exp(-||x_i - x_j||^2 / (2 bw^2)).
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, double bandwidth);

// Kernel evaluations k(x, X_j) against a training matrix.
Eigen::VectorXd kernel_column(const Eigen::MatrixXd& train_x,
                              const Eigen::VectorXd& x, double bandwidth);

// Median of the positive pairwise distances; 1.0 when every pair coincides.
double median_pairwise_distance(const Eigen::MatrixXd& x);

// Smooth difference-of-convex surrogate of the step indicator I(u > 0),
// L = L1 - L2 with L in [0,1] and a transition band of half-width delta.
struct SurrogateLoss {
  double delta = 1.0;

  double loss(double u) const {
    const double r = u / delta;
    if (u < -delta) return 0.0;
    if (u < 0.0) return 0.5 * (1.0 + r) * (1.0 + r);
    if (u < delta) return 1.0 - 0.5 * (1.0 - r) * (1.0 - r);
    return 1.0;
  }

  double l1(double u) const {
    const double r = u / delta;
    if (u <= -delta) return 0.0;
    if (u <= 0.0) return 0.5 * (1.0 + r) * (1.0 + r);
    return 0.5 + r;
  }

  double l2(double u) const {
    const double r = u / delta;
    if (u <= 0.0) return 0.0;
    if (u <= delta) return 0.5 * r * r;
    return r - 0.5;
  }

  double dl1(double u) const {
    if (u <= -delta) return 0.0;
    if (u <= 0.0) return (1.0 + u / delta) / delta;
    return 1.0 / delta;
  }

  double dl2(double u) const {
    if (u <= 0.0) return 0.0;
    if (u <= delta) return u / (delta * delta);
    return 1.0 / delta;
  }

  // Generalized second derivatives (piecewise constant, kink side immaterial).
  double d2l1(double u) const {
    return (u > -delta && u <= 0.0) ? 1.0 / (delta * delta) : 0.0;
  }

  double d2l2(double u) const {
    return (u > 0.0 && u <= delta) ? 1.0 / (delta * delta) : 0.0;
  }

  struct Eval {
    double l, l1, l2, dl1, dl2;
  };
  Eval eval(double u) const {
    return {l1(u) - l2(u), l1(u), l2(u), dl1(u), dl2(u)};
  }
};

// Training covariates with the kernel bandwidth; enough to score new points.
struct KernelModel {
  double bandwidth = 1.0;
  Eigen::MatrixXd train_x;  // n x p
};

// Kernel decision rule d(x) = sign(sum_j beta_j k(x, X_j)); an exact zero
// resolves to +1.
struct TreatmentRule {
  KernelModel kernel;
  Eigen::VectorXd beta;

  double margin(const Eigen::VectorXd& x) const;
  int decide(const Eigen::VectorXd& x) const {
    return margin(x) < 0.0 ? -1 : 1;
  }

  std::string to_json() const;
  static TreatmentRule from_json(const std::string& text);
};

}  // namespace survitr
