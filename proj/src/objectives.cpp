#include "survitr/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "survitr/errors.hpp"

namespace survitr {

void DcObjective::validate() const {
  const int n = size();
  if (n < 1) throw DataError("objective has no subjects");
  if (weights.size() != n || arms.size() != n)
    throw DataError("objective vector lengths disagree");
  if (gram.rows() != n || gram.cols() != n)
    throw DataError("gram matrix must be n x n");
  if (!(lambda > 0.0)) throw DataError("ridge weight must be positive");
  if (!(loss.delta > 0.0)) throw DataError("loss delta must be positive");
  if (criterion == Criterion::cvar && !(gamma > 0.0 && gamma < 1.0))
    throw DataError("gamma must lie in (0,1)");
  if (criterion == Criterion::bpoe && !(tau > 0.0))
    throw DataError("tau must be positive");
  for (int i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw DataError("weights must be finite and nonnegative");
    if (arms[i] != 1.0 && arms[i] != -1.0)
      throw DataError("arms must be +1 or -1");
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]))
      throw DataError("times must be finite and nonnegative");
  }
}

SampleState SampleState::full(int n) {
  SampleState s;
  s.slots.resize(n);
  std::iota(s.slots.begin(), s.slots.end(), 0);
  return s;
}

DcWorkspace::DcWorkspace(const DcObjective& obj, std::vector<int> slots)
    : obj_(&obj), n_slots_(static_cast<int>(slots.size())) {
  if (slots.empty()) throw DataError("empty sample state");
  const int n = obj.size();

  std::sort(slots.begin(), slots.end());
  for (std::size_t k = 0; k < slots.size();) {
    const int subject = slots[k];
    if (subject < 0 || subject >= n) throw DataError("slot index out of range");
    std::size_t run = k;
    while (run < slots.size() && slots[run] == subject) ++run;
    Entry e;
    e.subject = subject;
    e.mult = static_cast<double>(run - k);
    e.y = obj.times[subject];
    e.w = obj.weights[subject];
    e.a = obj.arms[subject];
    distinct_.push_back(subject);
    entries_.push_back(e);
    k = run;
  }

  order_.resize(entries_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::sort(order_.begin(), order_.end(), [&](int a, int b) {
    return entries_[a].y < entries_[b].y;
  });

  gsub_.resize(obj.gram.rows(), static_cast<Eigen::Index>(distinct_.size()));
  for (std::size_t e = 0; e < distinct_.size(); ++e)
    gsub_.col(static_cast<Eigen::Index>(e)) = obj.gram.col(distinct_[e]);

  build_knots_and_aggregates();
}

std::shared_ptr<const DcWorkspace> DcWorkspace::make(const DcObjective& obj,
                                                     std::vector<int> slots) {
  return std::make_shared<const DcWorkspace>(obj, std::move(slots));
}

int DcWorkspace::entry_of(int subject) const {
  const auto it = std::lower_bound(distinct_.begin(), distinct_.end(), subject);
  if (it == distinct_.end() || *it != subject)
    throw DataError("subject not present in sample");
  return static_cast<int>(it - distinct_.begin());
}

void DcWorkspace::build_knots_and_aggregates() {
  const int d = static_cast<int>(entries_.size());
  const Criterion crit = obj_->criterion;
  const double tau = obj_->tau;

  // Sorted view of (y, mult, subject).
  std::vector<double> ys(d);
  for (int k = 0; k < d; ++k) ys[k] = entries_[order_[k]].y;

  if (crit == Criterion::mean) {
    knots_.push_back({0.0, -1});
    knot_srcy_.push_back(std::numeric_limits<double>::quiet_NaN());
    knot_cut_.push_back(d);
    for (Entry& e : entries_) e.neg_agg = e.w * e.y;
    return;
  }

  if (crit == Criterion::cvar) {
    // Suffix sums of mult and mult*y over the sorted order.
    std::vector<double> suff_m(d + 1, 0.0), suff_my(d + 1, 0.0);
    for (int k = d; k-- > 0;) {
      const Entry& e = entries_[order_[k]];
      suff_m[k] = suff_m[k + 1] + e.mult;
      suff_my[k] = suff_my[k + 1] + e.mult * e.y;
    }
    for (int k = 0; k < d; ++k) {
      Entry& e = entries_[order_[k]];
      e.pos_agg = e.w * (suff_my[k + 1] - e.y * suff_m[k + 1]);
    }
    // One knot per distinct follow-up time, ascending.
    for (int k = 0; k < d; ++k) {
      const Entry& e = entries_[order_[k]];
      if (!knots_.empty() && knots_.back().scalar == e.y) {
        knots_.back().subject = std::min(knots_.back().subject, e.subject);
        continue;
      }
      knots_.push_back({e.y, e.subject});
      knot_srcy_.push_back(e.y);
    }
    for (std::size_t j = 0; j < knots_.size(); ++j) {
      knot_cut_.push_back(static_cast<int>(
          std::upper_bound(ys.begin(), ys.end(), knot_srcy_[j]) - ys.begin()));
    }
    return;
  }

  // bpoe: candidate c values 1/(y - tau) for y > tau, plus the boundary c = 0.
  std::vector<double> suff_m(d + 1, 0.0), suff_r(d + 1, 0.0);
  const int p_tau = static_cast<int>(
      std::upper_bound(ys.begin(), ys.end(), tau) - ys.begin());
  for (int k = d; k-- > p_tau;) {
    const Entry& e = entries_[order_[k]];
    suff_m[k] = suff_m[k + 1] + e.mult;
    suff_r[k] = suff_r[k + 1] + e.mult / (e.y - tau);
  }
  for (int k = 0; k < d; ++k) {
    Entry& e = entries_[order_[k]];
    const int start = std::max(
        p_tau, static_cast<int>(std::upper_bound(ys.begin(), ys.end(), e.y) -
                                ys.begin()));
    e.pos_agg = e.w * (suff_m[start] + (tau - e.y) * suff_r[start] + 1.0);
  }
  knots_.push_back({0.0, -1});
  knot_srcy_.push_back(std::numeric_limits<double>::quiet_NaN());
  // Descending y gives ascending c = 1/(y - tau).
  for (int k = d; k-- > p_tau;) {
    const Entry& e = entries_[order_[k]];
    const double c = 1.0 / (e.y - tau);
    if (knots_.size() > 1 && knots_.back().scalar == c) {
      knots_.back().subject = std::min(knots_.back().subject, e.subject);
      continue;
    }
    knots_.push_back({c, e.subject});
    knot_srcy_.push_back(e.y);
  }
  knot_cut_.push_back(d);  // c = 0 covers every subject
  for (std::size_t j = 1; j < knots_.size(); ++j) {
    knot_cut_.push_back(static_cast<int>(
        std::upper_bound(ys.begin(), ys.end(), knot_srcy_[j]) - ys.begin()));
  }
}

Eigen::VectorXd DcWorkspace::margins(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd u = gsub_.transpose() * beta;
  for (std::size_t e = 0; e < entries_.size(); ++e)
    u[static_cast<Eigen::Index>(e)] *= entries_[e].a;
  return u;
}

Eigen::VectorXd DcWorkspace::inner_values_from_margins(
    const Eigen::VectorXd& u) const {
  const int d = static_cast<int>(entries_.size());
  const double n_inv = 1.0 / n_slots_;
  // Prefix sums over the sorted order of mult*L*W and mult*L*W*y.
  std::vector<double> ps1(d + 1, 0.0), ps2(d + 1, 0.0);
  for (int k = 0; k < d; ++k) {
    const Entry& e = entries_[order_[k]];
    const double lw = e.mult * obj_->loss.loss(u[order_[k]]) * e.w;
    ps1[k + 1] = ps1[k] + lw;
    ps2[k + 1] = ps2[k] + lw * e.y;
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(knots_.size()));
  switch (obj_->criterion) {
    case Criterion::cvar:
      for (std::size_t j = 0; j < knots_.size(); ++j) {
        const int cut = knot_cut_[j];
        const double y_j = knot_srcy_[j];
        v[static_cast<Eigen::Index>(j)] =
            -obj_->gamma * y_j + n_inv * (y_j * ps1[cut] - ps2[cut]);
      }
      break;
    case Criterion::bpoe:
      v[0] = n_inv * ps1[d];
      for (std::size_t j = 1; j < knots_.size(); ++j) {
        const int cut = knot_cut_[j];
        const double y_j = knot_srcy_[j];
        v[static_cast<Eigen::Index>(j)] =
            n_inv * (y_j * ps1[cut] - ps2[cut]) / (y_j - obj_->tau);
      }
      break;
    case Criterion::mean:
      v[0] = -n_inv * ps2[d];
      break;
  }
  return v;
}

Eigen::VectorXd DcWorkspace::inner_values(const Eigen::VectorXd& beta) const {
  return inner_values_from_margins(margins(beta));
}

double DcWorkspace::ridge(const Eigen::VectorXd& beta) const {
  return obj_->lambda * beta.dot(obj_->gram * beta);
}

double DcWorkspace::value(const Eigen::VectorXd& beta) const {
  return inner_values(beta).minCoeff() + ridge(beta);
}

std::vector<int> DcWorkspace::active_from_inner(const Eigen::VectorXd& inner,
                                                double eps) {
  const double vmin = inner.minCoeff();
  std::vector<int> act;
  for (Eigen::Index j = 0; j < inner.size(); ++j)
    if (inner[j] <= vmin + eps) act.push_back(static_cast<int>(j));
  return act;
}

std::vector<int> DcWorkspace::active_set(const Eigen::VectorXd& beta,
                                         double eps) const {
  return active_from_inner(inner_values(beta), eps);
}

double DcWorkspace::convex_part(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd u = margins(beta);
  double acc = 0.0;
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const Entry& en = entries_[e];
    acc += en.mult * (obj_->loss.l1(u[static_cast<Eigen::Index>(e)]) * en.pos_agg +
                      obj_->loss.l2(u[static_cast<Eigen::Index>(e)]) * en.neg_agg);
  }
  return acc / n_slots_;
}

Eigen::VectorXd DcWorkspace::convex_part_gradient(
    const Eigen::VectorXd& beta) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(obj_->size());
  convex_part_from_margins(margins(beta), grad);
  return grad;
}

double DcWorkspace::convex_part_from_margins(const Eigen::VectorXd& u,
                                             Eigen::VectorXd& grad) const {
  double acc = 0.0;
  Eigen::VectorXd coef(u.size());
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const Entry& en = entries_[e];
    const auto ue = u[static_cast<Eigen::Index>(e)];
    acc += en.mult * (obj_->loss.l1(ue) * en.pos_agg +
                      obj_->loss.l2(ue) * en.neg_agg);
    coef[static_cast<Eigen::Index>(e)] =
        en.mult *
        (obj_->loss.dl1(ue) * en.pos_agg + obj_->loss.dl2(ue) * en.neg_agg) *
        en.a / n_slots_;
  }
  grad.noalias() += gsub_ * coef;
  return acc / n_slots_;
}

Eigen::VectorXd DcWorkspace::convex_curvature(const Eigen::VectorXd& u) const {
  Eigen::VectorXd c(u.size());
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const Entry& en = entries_[e];
    const auto ue = u[static_cast<Eigen::Index>(e)];
    c[static_cast<Eigen::Index>(e)] =
        en.mult *
        (obj_->loss.d2l1(ue) * en.pos_agg + obj_->loss.d2l2(ue) * en.neg_agg) /
        n_slots_;
  }
  return c;
}

Eigen::VectorXd DcWorkspace::apply_curvature(const Eigen::VectorXd& c,
                                             const Eigen::VectorXd& p) const {
  const Eigen::VectorXd t = gsub_.transpose() * p;
  return gsub_ * t.cwiseProduct(c);
}

double DcWorkspace::knot_constant(int knot_pos) const {
  if (obj_->criterion == Criterion::cvar)
    return -obj_->gamma * knots_[static_cast<std::size_t>(knot_pos)].scalar;
  return 0.0;
}

double DcWorkspace::knot_coefficient(int subject, int knot_pos) const {
  const Entry& e = entries_[static_cast<std::size_t>(entry_of(subject))];
  const Knot& k = knots_[static_cast<std::size_t>(knot_pos)];
  switch (obj_->criterion) {
    case Criterion::cvar:
      return e.w * std::max(k.scalar - e.y, 0.0);
    case Criterion::bpoe:
      return e.w * std::max(k.scalar * (obj_->tau - e.y) + 1.0, 0.0);
    case Criterion::mean:
      return -e.w * e.y;
  }
  return 0.0;
}

double DcWorkspace::aggregate_coefficient(int subject) const {
  const Entry& e = entries_[static_cast<std::size_t>(entry_of(subject))];
  return e.pos_agg - e.neg_agg;
}

double DcWorkspace::concave_part(int knot_pos,
                                 const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd u = margins(beta);
  double acc = 0.0;
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const Entry& en = entries_[e];
    const double c = knot_coefficient(en.subject, knot_pos);
    const double cpos = std::max(c, 0.0);
    const double cneg = std::max(-c, 0.0);
    const double l1 = obj_->loss.l1(u[static_cast<Eigen::Index>(e)]);
    const double l2 = obj_->loss.l2(u[static_cast<Eigen::Index>(e)]);
    acc += en.mult * (l1 * (en.pos_agg - cpos + cneg) +
                      l2 * (en.neg_agg - cneg + cpos));
  }
  return acc / n_slots_ - knot_constant(knot_pos);
}

Eigen::VectorXd DcWorkspace::concave_part_gradient(
    int knot_pos, const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd u = margins(beta);
  Eigen::VectorXd coef(u.size());
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const Entry& en = entries_[e];
    const double c = knot_coefficient(en.subject, knot_pos);
    const double cpos = std::max(c, 0.0);
    const double cneg = std::max(-c, 0.0);
    coef[static_cast<Eigen::Index>(e)] =
        en.mult *
        (obj_->loss.dl1(u[static_cast<Eigen::Index>(e)]) *
             (en.pos_agg - cpos + cneg) +
         obj_->loss.dl2(u[static_cast<Eigen::Index>(e)]) *
             (en.neg_agg - cneg + cpos)) *
        en.a / n_slots_;
  }
  return gsub_ * coef;
}

double cvar_term(const DcObjective& obj, const Eigen::VectorXd& beta,
                 double alpha, int i) {
  if (obj.criterion != Criterion::cvar)
    throw DataError("cvar_term requires the cvar criterion");
  const double u = obj.arms[i] * obj.gram.col(i).dot(beta);
  return alpha * obj.gamma -
         obj.loss.loss(u) * obj.weights[i] * std::max(alpha - obj.times[i], 0.0);
}

FullEval full_objective(const DcObjective& obj, const Eigen::VectorXd& beta) {
  const DcWorkspace ws(obj, SampleState::full(obj.size()).slots);
  const Eigen::VectorXd inner = ws.inner_values(beta);
  const double vmin = inner.minCoeff();
  FullEval out;
  out.value = vmin + ws.ridge(beta);
  const double tol = kKnotTieTol * (1.0 + std::abs(vmin));
  for (Eigen::Index j = 0; j < inner.size(); ++j)
    if (inner[j] <= vmin + tol)
      out.active.push_back(ws.knots()[static_cast<std::size_t>(j)]);
  return out;
}

double sampled_objective(const DcObjective& obj, const SampleState& state,
                         const Eigen::VectorXd& beta) {
  const DcWorkspace ws(obj, state.slots);
  return ws.value(beta);
}

std::vector<int> epsilon_active_set(const DcObjective& obj,
                                    const SampleState& state,
                                    const Eigen::VectorXd& beta, double eps) {
  if (eps < 0.0) throw DataError("active-set slack must be nonnegative");
  const DcWorkspace ws(obj, state.slots);
  return ws.active_set(beta, eps);
}

std::vector<Knot> knot_set(const DcObjective& obj, const SampleState& state) {
  return DcWorkspace(obj, state.slots).knots();
}

ConvexModel::ConvexModel(std::shared_ptr<const DcWorkspace> ws, int knot_pos,
                         const Eigen::VectorXd& beta_ref)
    : ws_(std::move(ws)),
      knot_pos_(knot_pos),
      beta_ref_(beta_ref),
      concave_ref_(ws_->concave_part(knot_pos, beta_ref)),
      concave_grad_(ws_->concave_part_gradient(knot_pos, beta_ref)) {
  eval_scale_ = 1.0 + std::abs(concave_ref_) +
                std::abs(ws_->convex_part(beta_ref)) +
                std::abs(ws_->ridge(beta_ref));
}

double ConvexModel::value(const Eigen::VectorXd& beta) const {
  return ws_->convex_part(beta) + ws_->ridge(beta) - concave_ref_ -
         concave_grad_.dot(beta - beta_ref_);
}

Eigen::VectorXd ConvexModel::gradient(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd g = ws_->convex_part_gradient(beta);
  g.noalias() += 2.0 * ws_->objective().lambda * (ws_->objective().gram * beta);
  g -= concave_grad_;
  return g;
}

double ConvexModel::value_and_gradient(const Eigen::VectorXd& beta,
                                       Eigen::VectorXd& grad) const {
  const DcObjective& obj = ws_->objective();
  // One shared matvec serves the ridge term and every margin.
  const Eigen::VectorXd kb = obj.gram * beta;
  grad = 2.0 * obj.lambda * kb;
  double value = obj.lambda * beta.dot(kb);

  const auto& subjects = ws_->distinct_subjects();
  Eigen::VectorXd u(static_cast<Eigen::Index>(subjects.size()));
  for (std::size_t e = 0; e < subjects.size(); ++e)
    u[static_cast<Eigen::Index>(e)] = obj.arms[subjects[e]] * kb[subjects[e]];

  value += ws_->convex_part_from_margins(u, grad);
  value -= concave_ref_ + concave_grad_.dot(beta - beta_ref_);
  grad -= concave_grad_;
  return value;
}

Eigen::VectorXd ConvexModel::curvature_at(const Eigen::VectorXd& beta) const {
  return ws_->convex_curvature(ws_->margins(beta));
}

Eigen::VectorXd ConvexModel::hessian_apply(const Eigen::VectorXd& curvature,
                                           const Eigen::VectorXd& p) const {
  Eigen::VectorXd y = ws_->apply_curvature(curvature, p);
  y.noalias() += 2.0 * ws_->objective().lambda * (ws_->objective().gram * p);
  return y;
}

ConvexModel convexified_model(const DcObjective& obj, const SampleState& state,
                              const Eigen::VectorXd& beta_ref, int knot_pos) {
  auto ws = DcWorkspace::make(obj, state.slots);
  if (knot_pos < 0 || knot_pos >= static_cast<int>(ws->knots().size()))
    throw DataError("knot position out of range");
  return ConvexModel(ws, knot_pos, beta_ref);
}

double mean_objective(const DcObjective& obj, const Eigen::VectorXd& beta) {
  if (obj.criterion != Criterion::mean)
    throw DataError("mean_objective requires the mean criterion");
  const int n = obj.size();
  const Eigen::VectorXd kb = obj.gram * beta;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += obj.loss.loss(obj.arms[i] * kb[i]) * obj.weights[i] * obj.times[i];
  return -acc / n + obj.lambda * beta.dot(kb);
}

}  // namespace survitr
