#pragma once
#include <Eigen/Core>
#include <memory>
#include <utility>
#include <vector>

#include "survitr/kernel_surrogate.hpp"

namespace survitr {

enum class Criterion { cvar, bpoe, mean };

// Empirical objective in min-of-finite-DC form.  All three criteria minimize
//   V(beta) = min_j v_j(beta) + lambda * beta' K beta
// where v_j is the inner value at candidate knot j:
//   cvar:  v_j = -gamma Y_j + (1/n) sum_i L(A_i K_i'beta) W_i (Y_j - Y_i)_+
//   bpoe:  v_j = (1/n) sum_i L(A_i K_i'beta) W_i max(0, c_j (tau - Y_i) + 1),
//          knots c_j in {1/(Y_j - tau) : Y_j > tau} and c = 0
//   mean:  single knot, v = -(1/n) sum_i L(A_i K_i'beta) W_i Y_i
struct DcObjective {
  Criterion criterion = Criterion::cvar;
  double gamma = 0.5;
  double tau = 0.5;
  double lambda = 1e-2;
  SurrogateLoss loss;

  Eigen::VectorXd times;    // Y_i
  Eigen::VectorXd weights;  // W_i >= 0
  Eigen::VectorXd arms;     // A_i in {+1,-1}
  Eigen::MatrixXd gram;     // K, n x n

  int size() const { return static_cast<int>(times.size()); }
  void validate() const;
};

// Multiset of subject indices drawn with replacement; grows across solver
// iterations.
struct SampleState {
  std::vector<int> slots;
  int size() const { return static_cast<int>(slots.size()); }
  void extend(const std::vector<int>& fresh) {
    slots.insert(slots.end(), fresh.begin(), fresh.end());
  }
  static SampleState full(int n);
};

// Candidate inner-variable value.  subject is the index the knot came from,
// or -1 for the appended bpoe boundary knot c = 0 and the mean criterion's
// single artificial knot.
struct Knot {
  double scalar = 0.0;
  int subject = -1;
};

// Relative tie tolerance for argmin knot sets.
inline constexpr double kKnotTieTol = 1e-9;

// Evaluation machinery for one (objective, index multiset) pair: deduplicated
// knot list, multiplicity-weighted per-subject aggregates via sorted prefix
// sums, inner values, DC components and their gradients.
class DcWorkspace {
 public:
  DcWorkspace(const DcObjective& obj, std::vector<int> slots);
  static std::shared_ptr<const DcWorkspace> make(const DcObjective& obj,
                                                 std::vector<int> slots);

  const DcObjective& objective() const { return *obj_; }
  int sample_size() const { return n_slots_; }
  const std::vector<Knot>& knots() const { return knots_; }
  const std::vector<int>& distinct_subjects() const { return distinct_; }

  // Signed margins u_i = A_i K_i' beta for the distinct subjects.
  Eigen::VectorXd margins(const Eigen::VectorXd& beta) const;

  // Inner value v_j for every knot (no ridge term).
  Eigen::VectorXd inner_values(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd inner_values_from_margins(const Eigen::VectorXd& u) const;

  double ridge(const Eigen::VectorXd& beta) const;
  // min_j v_j + ridge.
  double value(const Eigen::VectorXd& beta) const;
  // Knot positions within tol (absolute) of the inner minimum.
  std::vector<int> active_set(const Eigen::VectorXd& beta, double eps) const;
  static std::vector<int> active_from_inner(const Eigen::VectorXd& inner,
                                            double eps);

  // DC split: value == convex_part + ridge - max_j concave_part(j).
  double convex_part(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd convex_part_gradient(const Eigen::VectorXd& beta) const;
  // Convex component from precomputed margins; its gradient contribution is
  // accumulated into grad.
  double convex_part_from_margins(const Eigen::VectorXd& u,
                                  Eigen::VectorXd& grad) const;
  double concave_part(int knot_pos, const Eigen::VectorXd& beta) const;
  Eigen::VectorXd concave_part_gradient(int knot_pos,
                                        const Eigen::VectorXd& beta) const;

  // Per-subject knot coefficient c_{i,j} (includes W_i) and its aggregate
  // over the slot multiset; exposed so tests can cross-check the cached
  // prefix sums against brute force.
  double knot_coefficient(int subject, int knot_pos) const;
  double aggregate_coefficient(int subject) const;
  double knot_constant(int knot_pos) const;

  // Curvature coefficients of the convex component at given margins (one
  // nonnegative entry per distinct subject): its generalized Hessian is
  // K_E diag(c) K_E' with K_E the cached Gram sub-block.
  Eigen::VectorXd convex_curvature(const Eigen::VectorXd& u) const;
  // y = K_E diag(c) K_E' p.
  Eigen::VectorXd apply_curvature(const Eigen::VectorXd& c,
                                  const Eigen::VectorXd& p) const;

 private:
  struct Entry {
    int subject;
    double mult;  // slot multiplicity
    double y, w, a;
    double pos_agg = 0.0;  // sum over knots of max(c_{i,j}, 0)
    double neg_agg = 0.0;  // sum over knots of max(-c_{i,j}, 0)
  };

  int entry_of(int subject) const;
  void build_knots_and_aggregates();

  const DcObjective* obj_;
  int n_slots_ = 0;
  std::vector<int> distinct_;
  std::vector<Entry> entries_;        // aligned with distinct_
  Eigen::MatrixXd gsub_;              // gram columns of the distinct subjects
  std::vector<int> order_;            // entry indices sorted by y ascending
  std::vector<Knot> knots_;           // sorted by scalar ascending
  std::vector<double> knot_srcy_;     // follow-up time the knot came from
  std::vector<int> knot_cut_;         // entries with y <= knot source y (sorted prefix length)
};

// Per-subject contribution to the CVaR inner objective at threshold alpha:
// alpha*gamma - L(A_i K_i'beta) W_i (alpha - Y_i)_+.
double cvar_term(const DcObjective& obj, const Eigen::VectorXd& beta,
                 double alpha, int i);

struct FullEval {
  double value = 0.0;
  std::vector<Knot> active;  // knots attaining the inner min within tie tol
};

// Full-data objective value and the argmin knot set.
FullEval full_objective(const DcObjective& obj, const Eigen::VectorXd& beta);

// Same form over the sampled multiset with denominator N_nu.
double sampled_objective(const DcObjective& obj, const SampleState& state,
                         const Eigen::VectorXd& beta);

// Knots of the sampled problem whose inner value is within eps of the
// sampled minimum; returned as positions into knot_set(obj, state).
std::vector<int> epsilon_active_set(const DcObjective& obj,
                                    const SampleState& state,
                                    const Eigen::VectorXd& beta, double eps);

std::vector<Knot> knot_set(const DcObjective& obj, const SampleState& state);

// Convex majorizing model at a reference point: the concave component of the
// DC split replaced by its linearization at beta_ref.
class ConvexModel {
 public:
  ConvexModel(std::shared_ptr<const DcWorkspace> ws, int knot_pos,
              const Eigen::VectorXd& beta_ref);

  double value(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  double value_and_gradient(const Eigen::VectorXd& beta,
                            Eigen::VectorXd& grad) const;

  // Magnitude of the summands behind one evaluation (the DC components are
  // far larger than their difference); sets the rounding floor.
  double evaluation_scale() const { return eval_scale_; }

  // Entry-wise curvature coefficients at beta and the generalized-Hessian
  // product (loss curvature + ridge; the proximal term is the caller's).
  Eigen::VectorXd curvature_at(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd hessian_apply(const Eigen::VectorXd& curvature,
                                const Eigen::VectorXd& p) const;

  const Eigen::VectorXd& reference() const { return beta_ref_; }
  int knot_position() const { return knot_pos_; }

 private:
  std::shared_ptr<const DcWorkspace> ws_;
  int knot_pos_;
  Eigen::VectorXd beta_ref_;
  double concave_ref_;          // phi2_j(beta_ref)
  Eigen::VectorXd concave_grad_;  // grad phi2_j(beta_ref)
  double eval_scale_ = 1.0;
};

ConvexModel convexified_model(const DcObjective& obj, const SampleState& state,
                              const Eigen::VectorXd& beta_ref, int knot_pos);

// Mean-criterion value -(1/n) sum_i L(A_i K_i'beta) W_i Y_i + ridge.
double mean_objective(const DcObjective& obj, const Eigen::VectorXd& beta);

}  // namespace survitr
