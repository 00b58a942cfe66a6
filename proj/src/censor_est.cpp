#include "survitr/censor_est.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "survitr/errors.hpp"

namespace survitr {

double StepCurve::at(double t) const {
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return initial;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

double StepCurve::left_at(double t) const {
  const auto it = std::lower_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return initial;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

namespace {

// Product-limit estimator treating event == 0 (censoring) as the event.
StepCurve km_curve(const std::vector<double>& times,
                   const std::vector<int>& censor_event) {
  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  StepCurve curve;
  double surv = 1.0;
  std::size_t k = 0;
  std::size_t at_risk = n;
  while (k < n) {
    const double t = times[order[k]];
    std::size_t leaving = 0;
    std::size_t events = 0;
    while (k < n && times[order[k]] == t) {
      ++leaving;
      events += censor_event[order[k]] ? 1 : 0;
      ++k;
    }
    if (events > 0) {
      surv *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
      curve.knots.push_back(t);
      curve.values.push_back(surv);
    }
    at_risk -= leaving;
  }
  return curve;
}

}  // namespace

double KaplanMeierCensor::survival(double t, const Eigen::VectorXd&,
                                   int arm) const {
  return (arm == 1 ? treated : control).at(t);
}

double KaplanMeierCensor::survival_left(double t, const Eigen::VectorXd&,
                                        int arm) const {
  return (arm == 1 ? treated : control).left_at(t);
}

const StepCurve& KaplanMeierCensor::curve(int arm) const {
  return arm == 1 ? treated : control;
}

void KaplanMeierCensor::write_curves_csv(const std::string& path_prefix) const {
  for (const int arm : {1, -1}) {
    std::ofstream out(path_prefix + (arm == 1 ? "_treated.csv" : "_control.csv"));
    if (!out) throw DataError("cannot write curve file at " + path_prefix);
    out << "time,survival\n";
    const StepCurve& c = curve(arm);
    for (std::size_t k = 0; k < c.knots.size(); ++k)
      out << c.knots[k] << "," << c.values[k] << "\n";
  }
}

KaplanMeierCensor fit_km(const Dataset& data) {
  std::vector<double> t_pos, t_neg;
  std::vector<int> e_pos, e_neg;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data[i];
    if (s.arm == 1) {
      t_pos.push_back(s.time);
      e_pos.push_back(1 - s.event);
    } else {
      t_neg.push_back(s.time);
      e_neg.push_back(1 - s.event);
    }
  }
  if (t_pos.empty() || t_neg.empty())
    throw DataError("arm with zero subjects in censoring fit");
  KaplanMeierCensor km;
  km.treated = km_curve(t_pos, e_pos);
  km.control = km_curve(t_neg, e_neg);
  return km;
}

Eigen::VectorXd CoxCensor::design_row(const Eigen::VectorXd& x, int arm) const {
  const int p = static_cast<int>(x.size());
  int q = p;
  if (design.include_arm) ++q;
  if (design.include_interactions) q += p;
  Eigen::VectorXd z(q);
  z.head(p) = x;
  int at = p;
  if (design.include_arm) z[at++] = arm;
  if (design.include_interactions) z.tail(p) = x * static_cast<double>(arm);
  return z;
}

double CoxCensor::survival(double t, const Eigen::VectorXd& x, int arm) const {
  const Eigen::VectorXd z = design_row(x, arm) - column_means;
  return std::exp(-baseline_cumhaz.at(t) * std::exp(z.dot(coefficients)));
}

double CoxCensor::survival_left(double t, const Eigen::VectorXd& x,
                                int arm) const {
  const Eigen::VectorXd z = design_row(x, arm) - column_means;
  return std::exp(-baseline_cumhaz.left_at(t) * std::exp(z.dot(coefficients)));
}

CoxCensor fit_cox(const Dataset& data, const CoxDesign& design) {
  const std::size_t n = data.size();
  CoxCensor model;
  model.design = design;
  const int q = static_cast<int>(model.design_row(data[0].x, data[0].arm).size());

  Eigen::MatrixXd z(n, q);
  Eigen::VectorXd time(n);
  std::vector<int> censor_event(n);
  std::size_t n_events = 0;
  for (std::size_t i = 0; i < n; ++i) {
    z.row(static_cast<Eigen::Index>(i)) =
        model.design_row(data[i].x, data[i].arm).transpose();
    time[static_cast<Eigen::Index>(i)] = data[i].time;
    censor_event[i] = 1 - data[i].event;
    n_events += censor_event[i];
  }
  if (n_events == 0) throw DataError("no events for censoring model");

  model.column_means = z.colwise().mean();
  z.rowwise() -= model.column_means.transpose();

  // Subjects sorted by time descending so risk sets accumulate incrementally.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return time[static_cast<Eigen::Index>(a)] > time[static_cast<Eigen::Index>(b)];
  });

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd grad(q);
  Eigen::MatrixXd info(q, q);
  double loglik = 0.0;

  auto pass = [&](const Eigen::VectorXd& b, bool with_derivatives) {
    loglik = 0.0;
    if (with_derivatives) {
      grad.setZero();
      info.setZero();
    }
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(q);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(q, q);
    std::size_t k = 0;
    while (k < n) {
      const double t = time[static_cast<Eigen::Index>(order[k])];
      // Everyone with follow-up >= t joins the risk set.
      while (k < n && time[static_cast<Eigen::Index>(order[k])] == t) {
        const auto idx = static_cast<Eigen::Index>(order[k]);
        const double w = std::exp(z.row(idx).dot(b));
        s0 += w;
        s1 += w * z.row(idx).transpose();
        if (with_derivatives)
          s2 += w * z.row(idx).transpose() * z.row(idx);
        ++k;
      }
      // Breslow: tied events share the same risk-set sums.
      for (std::size_t j = k; j-- > 0;) {
        const auto idx = static_cast<Eigen::Index>(order[j]);
        if (time[idx] != t) break;
        if (!censor_event[order[j]]) continue;
        loglik += z.row(idx).dot(b) - std::log(s0);
        if (with_derivatives) {
          const Eigen::VectorXd zbar = s1 / s0;
          grad += z.row(idx).transpose() - zbar;
          info += s2 / s0 - zbar * zbar.transpose();
        }
      }
    }
  };

  const double tol = 1e-8;
  const int max_iter = 100;
  bool converged = false;
  pass(beta, true);
  for (int iter = 0; iter < max_iter; ++iter) {
    model.iterations = iter + 1;
    model.grad_norm = grad.norm();
    if (model.grad_norm <= tol) {
      converged = true;
      break;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    if (!lu.isInvertible())
      throw SolverError("singular information matrix in censoring model");
    const Eigen::VectorXd step = lu.solve(grad);
    const double ll_old = loglik;
    double scale = 1.0;
    Eigen::VectorXd candidate;
    for (int h = 0; h < 30; ++h) {
      candidate = beta + scale * step;
      pass(candidate, true);
      if (loglik >= ll_old - 1e-12) break;
      scale *= 0.5;
    }
    beta = candidate;
  }
  if (!converged && grad.norm() > tol)
    throw SolverError("censoring model did not converge; gradient norm " +
                      std::to_string(grad.norm()));

  model.coefficients = beta;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (!lu.isInvertible())
    throw SolverError("singular information matrix in censoring model");
  const Eigen::MatrixXd cov = lu.inverse();
  model.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  // Breslow baseline cumulative hazard on ascending event times.
  model.baseline_cumhaz.initial = 0.0;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return time[static_cast<Eigen::Index>(a)] < time[static_cast<Eigen::Index>(b)];
  });
  Eigen::VectorXd risk(n);
  for (std::size_t i = 0; i < n; ++i)
    risk[static_cast<Eigen::Index>(i)] =
        std::exp(z.row(static_cast<Eigen::Index>(i)).dot(beta));
  // Suffix sums of risk over the ascending order give S0 at each time.
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;)
    suffix[i] = suffix[i + 1] + risk[static_cast<Eigen::Index>(order[i])];
  double cum = 0.0;
  std::size_t k = 0;
  while (k < n) {
    const double t = time[static_cast<Eigen::Index>(order[k])];
    const double s0 = suffix[k];
    std::size_t events = 0;
    while (k < n && time[static_cast<Eigen::Index>(order[k])] == t) {
      events += censor_event[order[k]] ? 1 : 0;
      ++k;
    }
    if (events > 0) {
      cum += static_cast<double>(events) / s0;
      model.baseline_cumhaz.knots.push_back(t);
      model.baseline_cumhaz.values.push_back(cum);
    }
  }
  return model;
}

}  // namespace survitr
