#pragma once
#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "survitr/errors.hpp"

namespace survitr {

// One observation of right-censored treatment data:
// covariates x, arm in {+1,-1}, follow-up time y = min(T, C),
// event indicator = 1 when the survival time was observed.
struct Subject {
  Eigen::VectorXd x;
  int arm = 1;
  double time = 0.0;
  int event = 1;
};

class CensorSurvival;  // censor_est.hpp

// Immutable collection of subjects sharing a covariate dimension, a
// restriction horizon and per-subject treated-arm propensities.
// Follow-up times are truncated at the horizon on construction; a raw time
// beyond the horizon becomes an event at the horizon (the survival time is
// restricted to [0, h], so follow-up past h pins it down exactly).
class Dataset {
 public:
  Dataset(std::vector<Subject> subjects, double horizon,
          double propensity_treated = 0.5);
  Dataset(std::vector<Subject> subjects, double horizon,
          Eigen::VectorXd propensity_treated);

  std::size_t size() const { return subjects_.size(); }
  int dim() const { return dim_; }
  double horizon() const { return horizon_; }
  const Subject& operator[](std::size_t i) const { return subjects_[i]; }
  const std::vector<Subject>& subjects() const { return subjects_; }

  // pi(A_i | X_i) for the arm the subject actually received.
  double propensity(std::size_t i) const;
  // pi(+1 | X_i).
  double propensity_treated(std::size_t i) const {
    return propensity_treated_[static_cast<Eigen::Index>(i)];
  }

  Eigen::MatrixXd covariate_matrix() const;
  Eigen::VectorXd times() const;
  Eigen::VectorXd arms() const;
  Eigen::VectorXd events() const;

 private:
  void validate_and_truncate();

  std::vector<Subject> subjects_;
  double horizon_;
  Eigen::VectorXd propensity_treated_;
  int dim_ = 0;
};

struct WeightedSubject {
  Subject subject;
  double w = 0.0;  // Delta / (pi * S_C), zero for censored subjects
};

// Default clamp applied to the estimated censoring survival before it
// enters a denominator.
inline constexpr double kCensorSurvivalFloor = 0.05;

// Inverse-probability weights W_i = Delta_i / (pi(A_i|X_i) *
// max(S_C(Y_i- | X_i, A_i), floor)).  The left limit of the censoring
// survival is used so that a subject's own censoring event does not deflate
// its weight.
std::vector<WeightedSubject> attach_weights(
    const Dataset& data, const CensorSurvival& s_hat,
    double floor = kCensorSurvivalFloor);

Eigen::VectorXd weight_vector(const std::vector<WeightedSubject>& ws);

// Column mapping for CSV ingestion.  Arm labels are mapped to {+1,-1} at
// load time; internal code never sees raw labels.
struct CsvSchema {
  std::vector<std::string> covariate_columns;
  std::string arm_column = "arm";
  std::string time_column = "time";
  std::string event_column = "event";
  std::optional<std::string> propensity_column;
  std::map<std::string, int> arm_mapping = {{"1", 1}, {"+1", 1}, {"-1", -1}};
  double horizon = 0.0;  // required, > 0
  double propensity_treated = 0.5;  // used when no propensity column
};

// Parse a one-header comma-separated UTF-8 file.  Errors carry the
// offending data row number (first data row is row 1).
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Serialize in the standard schema: x1..xp,arm,time,event[,propensity].
// load_csv(write_csv(d)) is the identity on the dataset.
void write_csv(const Dataset& data, const std::string& path,
               bool with_propensity = false);

// Schema matching the file written by write_csv.
CsvSchema standard_schema(int dim, double horizon, bool with_propensity = false);

}  // namespace survitr
