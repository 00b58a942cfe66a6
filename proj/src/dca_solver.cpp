#include "survitr/dca_solver.hpp"
#include <cstdio>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "json.hpp"
#include "survitr/errors.hpp"
#include "survitr/rng.hpp"

namespace survitr {

void SolverConfig::validate() const {
  if (!(rho > 0.0)) throw DataError("proximal weight rho must be positive");
  if (eps_active < 0.0) throw DataError("active-set slack must be nonnegative");
  if (sample_increment < 0) throw DataError("sample increment must be >= 0");
  if (max_outer < 1) throw DataError("max_outer must be >= 1");
  if (!(tol_step > 0.0) || !(inner_tol > 0.0))
    throw DataError("tolerances must be positive");
  if (inner_max_iter < 1) throw DataError("inner budget must be >= 1");
}

int SolverConfig::resolved_increment(int n) const {
  if (sample_increment > 0) return sample_increment;
  return std::max(32, (n + 19) / 20);
}

namespace {

struct LbfgsOutcome {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with Armijo backtracking; deterministic.  `noise` is
// the objective's evaluation-error scale.  Once the certifiable Armijo
// decrease falls below it, acceptance switches to the sign of the
// directional derivative: the objective is convex, so g(x+td)'d <= 0
// guarantees exact descent without consulting the rounded-off value.
template <typename Fn>
LbfgsOutcome lbfgs_minimize(const Fn& value_and_gradient, Eigen::VectorXd x,
                            double tol, int max_iter, double noise) {
  const int memory = 8;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  Eigen::VectorXd grad(x.size());
  double f = value_and_gradient(x, grad);
  double gnorm = grad.norm();

  LbfgsOutcome out;
  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter;
    if (gnorm <= tol) {
      out.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      const Eigen::VectorXd& s = s_hist.back();
      const Eigen::VectorXd& y = y_hist.back();
      q *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double b = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - b) * s_hist[k];
    }
    Eigen::VectorXd direction = -q;
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    Eigen::VectorXd x_new(x.size()), grad_new(x.size());
    double f_new = f;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      x_new = x + step * direction;
      f_new = value_and_gradient(x_new, grad_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      if (-1e-4 * step * slope < noise && grad_new.dot(direction) <= 0.0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // at the rounding floor; stop at best point

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_new);
    grad = std::move(grad_new);
    gnorm = grad.norm();
    f = f_new;
  }
  out.x = std::move(x);
  out.value = f;
  out.grad_norm = gnorm;
  if (out.grad_norm <= tol) out.converged = true;
  return out;
}

}  // namespace

ProxResult solve_prox_subproblem(const ConvexModel& model,
                                 const Eigen::VectorXd& beta_ref, double rho,
                                 double inner_tol, int max_iter) {
  if (!(rho > 0.0)) throw DataError("proximal weight rho must be positive");
  const double inv_rho = 1.0 / rho;
  auto fg = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& grad) {
    const double base = model.value_and_gradient(beta, grad);
    const Eigen::VectorXd diff = beta - beta_ref;
    grad.noalias() += inv_rho * diff;
    return base + 0.5 * inv_rho * diff.squaredNorm();
  };

  Eigen::VectorXd g0(beta_ref.size());
  const double f0 = fg(beta_ref, g0);
  const double tol = inner_tol * (1.0 + std::abs(f0));
  // Rounding floor of one evaluation: the DC components are ~n times larger
  // than their difference, so the value is only accurate to eps * that scale.
  const double noise = 1e-13 * model.evaluation_scale();

  const LbfgsOutcome out = lbfgs_minimize(fg, beta_ref, tol, max_iter, noise);
  ProxResult pr;
  pr.beta = out.x;
  pr.grad_norm = out.grad_norm;
  pr.tolerance = tol;
  pr.iterations = out.iterations;
  pr.converged = out.converged;
  return pr;
}

namespace {

struct StepOutcome {
  Eigen::VectorXd beta_next;
  IterationRecord record;
};

// One proximal update over the epsilon-active knots of the given workspace.
StepOutcome dca_step(std::shared_ptr<const DcWorkspace> ws,
                     const Eigen::VectorXd& beta, const SolverConfig& cfg) {
  const Eigen::VectorXd inner = ws->inner_values(beta);
  const double value_before = inner.minCoeff() + ws->ridge(beta);
  const std::vector<int> active =
      DcWorkspace::active_from_inner(inner, cfg.eps_active);

  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_beta;
  for (const int j : active) {
    const ConvexModel model(ws, j, beta);
    ProxResult pr = solve_prox_subproblem(model, beta, cfg.rho, cfg.inner_tol,
                                          cfg.inner_max_iter);
    if (!pr.converged) {
      pr = solve_prox_subproblem(model, beta, cfg.rho, cfg.inner_tol,
                                 2 * cfg.inner_max_iter);
      if (!pr.converged) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "proximal subproblem failed twice; gradient norm %.3g "
                      "(tolerance %.3g) after %d iterations",
                      pr.grad_norm, pr.tolerance, pr.iterations);
        throw SolverError(msg);
      }
    }
    const double score = ws->value(pr.beta) +
                         (pr.beta - beta).squaredNorm() / (2.0 * cfg.rho);
    if (score < best_score) {
      best_score = score;
      best_beta = std::move(pr.beta);
    }
  }

  StepOutcome out;
  out.record.sample_size = ws->sample_size();
  out.record.active_size = static_cast<int>(active.size());
  out.record.value_before = value_before;
  out.record.step_norm = (best_beta - beta).norm();
  out.record.prox_term =
      out.record.step_norm * out.record.step_norm / (2.0 * cfg.rho);
  out.record.value_after = ws->value(best_beta);
  out.beta_next = std::move(best_beta);
  return out;
}

void finalize(FitResult& result, const DcObjective& obj,
              const SolverConfig& cfg, Eigen::VectorXd beta, bool converged,
              const std::string& reason) {
  result.beta = std::move(beta);
  result.converged = converged;
  result.stop_reason = reason;
  result.inner_scalar = extract_inner_scalar(obj, result.beta);
  result.objective = full_objective(obj, result.beta).value;
  result.config = cfg;
}

Eigen::VectorXd start_point(const DcObjective& obj,
                            const Eigen::VectorXd& beta0) {
  if (beta0.size() == 0) return Eigen::VectorXd::Zero(obj.size());
  if (beta0.size() != obj.size())
    throw DataError("starting point has the wrong length");
  return beta0;
}

}  // namespace

FitResult fit_sampled(const DcObjective& obj, const SolverConfig& cfg,
                      const Eigen::VectorXd& beta0) {
  obj.validate();
  cfg.validate();
  const int n = obj.size();
  Eigen::VectorXd beta = start_point(obj, beta0);

  Rng rng = Rng::stream(cfg.seed, 0x5a3f19d2ULL);
  SampleState state;
  FitResult result;
  int consecutive_small = 0;
  bool converged = false;
  for (int nu = 0; nu < cfg.max_outer; ++nu) {
    std::shared_ptr<const DcWorkspace> ws;
    if (cfg.identity_sampling) {
      ws = DcWorkspace::make(obj, SampleState::full(n).slots);
    } else {
      std::vector<int> fresh(cfg.resolved_increment(n));
      for (int& s : fresh) s = rng.uniform_index(n);
      state.extend(fresh);
      ws = DcWorkspace::make(obj, state.slots);
    }
    StepOutcome step = dca_step(ws, beta, cfg);
    result.trace.push_back(step.record);
    const double scale = 1.0 + beta.norm();
    beta = std::move(step.beta_next);
    if (step.record.step_norm <= cfg.tol_step * scale)
      ++consecutive_small;
    else
      consecutive_small = 0;
    if (consecutive_small >= 2) {
      converged = true;
      break;
    }
  }
  finalize(result, obj, cfg, std::move(beta), converged,
           converged ? "step tolerance" : "outer iteration cap");
  return result;
}

FitResult fit_deterministic(const DcObjective& obj, const SolverConfig& cfg,
                            const Eigen::VectorXd& beta0) {
  obj.validate();
  cfg.validate();
  Eigen::VectorXd beta = start_point(obj, beta0);
  const auto ws = DcWorkspace::make(obj, SampleState::full(obj.size()).slots);

  FitResult result;
  int consecutive_small = 0;
  bool converged = false;
  for (int nu = 0; nu < cfg.max_outer; ++nu) {
    StepOutcome step = dca_step(ws, beta, cfg);
    result.trace.push_back(step.record);
    const double scale = 1.0 + beta.norm();
    beta = std::move(step.beta_next);
    if (step.record.step_norm <= cfg.tol_step * scale)
      ++consecutive_small;
    else
      consecutive_small = 0;
    if (consecutive_small >= 2) {
      converged = true;
      break;
    }
  }
  finalize(result, obj, cfg, std::move(beta), converged,
           converged ? "step tolerance" : "outer iteration cap");
  return result;
}

double extract_inner_scalar(const DcObjective& obj,
                            const Eigen::VectorXd& beta) {
  if (obj.criterion == Criterion::mean) return 0.0;
  const DcWorkspace ws(obj, SampleState::full(obj.size()).slots);
  const Eigen::VectorXd inner = ws.inner_values(beta);
  const double vmin = inner.minCoeff();
  const double tol = kKnotTieTol * (1.0 + std::abs(vmin));
  for (Eigen::Index j = 0; j < inner.size(); ++j) {
    if (inner[j] <= vmin + tol)
      return ws.knots()[static_cast<std::size_t>(j)].scalar;
  }
  return ws.knots().front().scalar;
}

std::string FitResult::to_json() const {
  nlohmann::json j;
  j["beta"] = std::vector<double>(beta.data(), beta.data() + beta.size());
  j["inner_scalar"] = inner_scalar;
  j["converged"] = converged;
  j["stop_reason"] = stop_reason;
  j["objective"] = objective;
  nlohmann::json tr = nlohmann::json::array();
  for (const IterationRecord& r : trace) {
    tr.push_back({{"sample_size", r.sample_size},
                  {"active_size", r.active_size},
                  {"value_before", r.value_before},
                  {"value_after", r.value_after},
                  {"step_norm", r.step_norm},
                  {"prox_term", r.prox_term}});
  }
  j["trace"] = tr;
  j["config"] = {{"rho", config.rho},
                 {"eps_active", config.eps_active},
                 {"sample_increment", config.sample_increment},
                 {"max_outer", config.max_outer},
                 {"tol_step", config.tol_step},
                 {"inner_tol", config.inner_tol},
                 {"inner_max_iter", config.inner_max_iter},
                 {"seed", config.seed},
                 {"identity_sampling", config.identity_sampling}};
  return j.dump(2);
}

}  // namespace survitr
