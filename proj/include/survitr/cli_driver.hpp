#pragma once
#include <cstdint>
#include <string>

#include "survitr/censor_est.hpp"
#include "survitr/data_model.hpp"
#include "survitr/dca_solver.hpp"
#include "survitr/kernel_surrogate.hpp"
#include "survitr/objectives.hpp"

namespace survitr::cli {

enum class CensorEstimator { km, cox };

// End-to-end training pipeline shared by the subcommands: censoring fit,
// inverse-probability weights, Gram matrix, DC fit.
struct FitPipelineConfig {
  Criterion criterion = Criterion::cvar;
  double gamma = 0.5;
  double tau = 0.5;
  double lambda = 1e-2;
  double bandwidth = 0.0;  // 0 -> median pairwise distance heuristic
  double delta = 1.0;
  CensorEstimator censor = CensorEstimator::km;
  bool deterministic = false;  // full-data DCA instead of sampled
  SolverConfig solver;
};

struct FittedMethod {
  TreatmentRule rule;
  FitResult fit;
  double bandwidth = 0.0;
};

FittedMethod fit_method(const Dataset& data, const FitPipelineConfig& cfg);

// Objective assembly without running the solver.
DcObjective make_objective(const Dataset& data, const CensorSurvival& s_hat,
                           const Eigen::MatrixXd& gram,
                           const FitPipelineConfig& cfg);

// Entry point used by the survitr binary.  Exit codes: 0 success, 1 usage,
// 2 data error, 3 solver failure.
int run(int argc, const char* const* argv);

}  // namespace survitr::cli
