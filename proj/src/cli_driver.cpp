#include "survitr/cli_driver.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "survitr/evaluation.hpp"
#include "survitr/rng.hpp"
#include "survitr/simgen.hpp"

namespace survitr::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void parallel_for(int jobs, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, jobs));
  if (workers == 1) {
    for (int j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int j = next.fetch_add(1); j < jobs; j = next.fetch_add(1)) fn(j);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::map<std::string, int> parse_arm_map(const std::string& text) {
  if (text.empty()) return {{"1", 1}, {"+1", 1}, {"-1", -1}};
  std::map<std::string, int> mapping;
  std::stringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ',')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw DataError("arm map entries must look like label=+1");
    const std::string label = pair.substr(0, eq);
    const std::string value = pair.substr(eq + 1);
    if (value == "1" || value == "+1")
      mapping[label] = 1;
    else if (value == "-1")
      mapping[label] = -1;
    else
      throw DataError("arm map values must be +1 or -1, got " + value);
  }
  return mapping;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Criterion criterion_from_string(const std::string& name) {
  if (name == "cvar") return Criterion::cvar;
  if (name == "bpoe") return Criterion::bpoe;
  if (name == "mean") return Criterion::mean;
  throw DataError("unknown criterion: " + name);
}

}  // namespace

DcObjective make_objective(const Dataset& data, const CensorSurvival& s_hat,
                           const Eigen::MatrixXd& gram,
                           const FitPipelineConfig& cfg) {
  DcObjective obj;
  obj.criterion = cfg.criterion;
  obj.gamma = cfg.gamma;
  obj.tau = cfg.tau;
  obj.lambda = cfg.lambda;
  obj.loss.delta = cfg.delta;
  obj.times = data.times();
  obj.arms = data.arms();
  obj.weights = weight_vector(attach_weights(data, s_hat));
  obj.gram = gram;
  return obj;
}

FittedMethod fit_method(const Dataset& data, const FitPipelineConfig& cfg) {
  std::unique_ptr<CensorSurvival> s_hat;
  if (cfg.censor == CensorEstimator::km)
    s_hat = std::make_unique<KaplanMeierCensor>(fit_km(data));
  else
    s_hat = std::make_unique<CoxCensor>(fit_cox(data));

  const Eigen::MatrixXd x = data.covariate_matrix();
  const double bw =
      cfg.bandwidth > 0.0 ? cfg.bandwidth : median_pairwise_distance(x);
  const Eigen::MatrixXd gram = gram_matrix(x, bw);
  const DcObjective obj = make_objective(data, *s_hat, gram, cfg);

  FittedMethod out;
  out.fit = cfg.deterministic ? fit_deterministic(obj, cfg.solver)
                              : fit_sampled(obj, cfg.solver);
  out.bandwidth = bw;
  out.rule.kernel.bandwidth = bw;
  out.rule.kernel.train_x = x;
  out.rule.beta = out.fit.beta;
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Option bundles bound to CLI11 flags.

struct SchemaOptions {
  std::string covariates;
  std::string arm_col = "arm";
  std::string time_col = "time";
  std::string event_col = "event";
  std::string propensity_col;
  std::string arm_map;
  double horizon = 0.0;
  double propensity = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--covariates", covariates,
                    "comma-separated covariate columns");
    app->add_option("--arm-col", arm_col, "treatment column");
    app->add_option("--time-col", time_col, "follow-up time column");
    app->add_option("--event-col", event_col, "event indicator column");
    app->add_option("--propensity-col", propensity_col,
                    "optional propensity column");
    app->add_option("--arm-map", arm_map,
                    "arm label mapping, e.g. drugA=+1,drugB=-1");
    app->add_option("--horizon", horizon, "restriction time h");
    app->add_option("--propensity", propensity,
                    "constant treated-arm propensity");
  }

  CsvSchema schema() const {
    if (covariates.empty())
      throw DataError("--covariates is required for CSV input");
    if (!(horizon > 0.0)) throw DataError("--horizon must be positive");
    CsvSchema s;
    s.covariate_columns = split_commas(covariates);
    s.arm_column = arm_col;
    s.time_column = time_col;
    s.event_column = event_col;
    if (!propensity_col.empty()) s.propensity_column = propensity_col;
    s.arm_mapping = parse_arm_map(arm_map);
    s.horizon = horizon;
    s.propensity_treated = propensity;
    return s;
  }
};

struct PipelineOptions {
  std::string criterion = "cvar";
  double gamma = 0.5;
  double tau = 0.5;
  double lambda = 1e-2;
  double bandwidth = 0.0;
  double delta = 1.0;
  std::string censor = "km";
  bool deterministic = false;
  double rho = 1.0;
  double eps_active = 1e-3;
  int increment = 0;
  int max_outer = 200;
  double tol_step = 1e-5;
  double inner_tol = 1e-7;
  int inner_iters = 500;

  void attach(CLI::App* app, bool with_criterion = true) {
    if (with_criterion)
      app->add_option("--criterion", criterion, "cvar | bpoe | mean");
    app->add_option("--gamma", gamma, "CVaR quantile level in (0,1)");
    app->add_option("--tau", tau, "buffered threshold");
    app->add_option("--lambda", lambda, "ridge weight");
    app->add_option("--bandwidth", bandwidth,
                    "kernel bandwidth; 0 = median heuristic");
    app->add_option("--delta", delta, "surrogate transition half-width");
    app->add_option("--censor", censor, "censoring estimator: km | cox");
    app->add_flag("--deterministic", deterministic, "full-data DCA");
    app->add_option("--rho", rho, "proximal weight");
    app->add_option("--eps-active", eps_active, "active-set slack");
    app->add_option("--increment", increment,
                    "per-iteration sample draws; 0 = default");
    app->add_option("--max-outer", max_outer, "outer iteration cap");
    app->add_option("--tol-step", tol_step, "outer step tolerance");
    app->add_option("--inner-tol", inner_tol, "subproblem gradient tolerance");
    app->add_option("--inner-iters", inner_iters, "subproblem budget");
  }

  FitPipelineConfig pipeline(std::uint64_t seed) const {
    FitPipelineConfig cfg;
    cfg.criterion = criterion_from_string(criterion);
    cfg.gamma = gamma;
    cfg.tau = tau;
    cfg.lambda = lambda;
    cfg.bandwidth = bandwidth;
    cfg.delta = delta;
    if (censor == "km")
      cfg.censor = CensorEstimator::km;
    else if (censor == "cox")
      cfg.censor = CensorEstimator::cox;
    else
      throw DataError("unknown censoring estimator: " + censor);
    cfg.deterministic = deterministic;
    cfg.solver.rho = rho;
    cfg.solver.eps_active = eps_active;
    cfg.solver.sample_increment = increment;
    cfg.solver.max_outer = max_outer;
    cfg.solver.tol_step = tol_step;
    cfg.solver.inner_tol = inner_tol;
    cfg.solver.inner_max_iter = inner_iters;
    cfg.solver.seed = seed;
    return cfg;
  }
};

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw DataError("--out directory is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void echo_config(CLI::App& app, const fs::path& dir) {
  write_text(dir / "config_resolved.ini", app.config_to_str(true, false));
}

// ---------------------------------------------------------------------------
// Reports.

struct MethodReport {
  std::string method;
  std::vector<double> v_mean, v1, v2;
};

void write_experiment_reports(const fs::path& dir,
                              const std::vector<MethodReport>& methods,
                              bool plot_data) {
  std::ostringstream rows;
  rows << "repeat,method,v_mean,v1,v2\n";
  for (const auto& m : methods)
    for (std::size_t r = 0; r < m.v_mean.size(); ++r)
      rows << r << "," << m.method << "," << fmt12(m.v_mean[r]) << ","
           << fmt12(m.v1[r]) << "," << fmt12(m.v2[r]) << "\n";
  write_text(dir / "results.csv", rows.str());

  std::ostringstream summary;
  summary << "method,v_mean,v_mean_sd,v1,v1_sd,v2,v2_sd\n";
  for (const auto& m : methods) {
    const auto sm = summarize(m.v_mean);
    const auto s1 = summarize(m.v1);
    const auto s2 = summarize(m.v2);
    summary << m.method << "," << fmt12(sm.mean) << "," << fmt12(sm.sd) << ","
            << fmt12(s1.mean) << "," << fmt12(s1.sd) << "," << fmt12(s2.mean)
            << "," << fmt12(s2.sd) << "\n";
  }
  write_text(dir / "summary.csv", summary.str());

  if (plot_data) {
    auto quantiles = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      auto q = [&](double p) {
        const double idx = p * (static_cast<double>(v.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (idx - static_cast<double>(lo)) * (v[hi] - v[lo]);
      };
      return std::array<double, 5>{v.front(), q(0.25), q(0.5), q(0.75),
                                   v.back()};
    };
    std::ostringstream box;
    box << "method,metric,min,q1,median,q3,max\n";
    for (const auto& m : methods) {
      const std::array<std::pair<std::string, const std::vector<double>*>, 3>
          metrics{{{"v_mean", &m.v_mean}, {"v1", &m.v1}, {"v2", &m.v2}}};
      for (const auto& [name, values] : metrics) {
        const auto q = quantiles(*values);
        box << m.method << "," << name;
        for (const double x : q) box << "," << fmt12(x);
        box << "\n";
      }
    }
    write_text(dir / "boxplot.csv", box.str());
  }
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

struct SimulateOptions {
  std::string scenario = "s1";
  int n = 500;
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate(CLI::App& app, const SimulateOptions& opt) {
  const fs::path dir = prepare_out_dir(opt.out);
  const ScenarioSpec spec =
      make_scenario(scenario_from_string(opt.scenario), opt.n, opt.seed);
  const Dataset data = generate(spec);
  write_csv(data, (dir / "data.csv").string());
  echo_config(app, dir);
  std::cout << "wrote " << (dir / "data.csv").string() << " (" << data.size()
            << " rows, horizon " << fmt12(data.horizon()) << ")\n";
  return 0;
}

struct TrainOptions {
  std::string data_path;
  SchemaOptions schema;
  PipelineOptions pipeline;
  std::uint64_t seed = 1;
  std::string out;
};

nlohmann::json model_json(const FittedMethod& m, const FitPipelineConfig& cfg,
                          std::uint64_t seed) {
  nlohmann::json j = nlohmann::json::parse(m.rule.to_json());
  j["criterion"] = cfg.criterion == Criterion::cvar   ? "cvar"
                   : cfg.criterion == Criterion::bpoe ? "bpoe"
                                                      : "mean";
  j["gamma"] = cfg.gamma;
  j["tau"] = cfg.tau;
  j["lambda"] = cfg.lambda;
  j["delta"] = cfg.delta;
  j["inner_scalar"] = m.fit.inner_scalar;
  j["seed"] = seed;
  return j;
}

int run_train(CLI::App& app, const TrainOptions& opt) {
  if (opt.data_path.empty()) throw DataError("--data is required");
  const fs::path dir = prepare_out_dir(opt.out);
  const Dataset data = load_csv(opt.data_path, opt.schema.schema());
  const FitPipelineConfig cfg = opt.pipeline.pipeline(opt.seed);
  const FittedMethod fitted = fit_method(data, cfg);
  write_text(dir / "model.json", model_json(fitted, cfg, opt.seed).dump(2));
  write_text(dir / "fit.json", fitted.fit.to_json());
  echo_config(app, dir);
  std::cout << "trained " << opt.pipeline.criterion << " model on "
            << data.size() << " subjects; objective "
            << fmt12(fitted.fit.objective) << "\n";
  return 0;
}

struct EvaluateOptions {
  std::string model_path;
  std::string scenario;
  std::string data_path;
  SchemaOptions schema;
  int n_test = 10000;
  double gamma = 0.5;
  double tau = 0.5;
  double alpha_hat = -1.0;  // <0: take from model when criterion matches
  double c_hat = -1.0;
  std::string censor = "km";
  std::uint64_t seed = 1;
  std::string out;
};

int run_evaluate(CLI::App& app, const EvaluateOptions& opt) {
  if (opt.model_path.empty()) throw DataError("--model is required");
  const fs::path dir = prepare_out_dir(opt.out);
  std::ifstream in(opt.model_path);
  if (!in) throw DataError("cannot open model file: " + opt.model_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const nlohmann::json mj = nlohmann::json::parse(buffer.str());
  const TreatmentRule rule = TreatmentRule::from_json(buffer.str());
  const RuleFn rule_fn = [&rule](const Eigen::VectorXd& x) {
    return rule.decide(x);
  };

  nlohmann::json report;
  std::ostringstream csv;
  if (!opt.scenario.empty()) {
    const ScenarioSpec spec =
        make_scenario(scenario_from_string(opt.scenario), 1, opt.seed);
    const EvalReport r = evaluate_rule_simulation(spec, rule_fn, opt.gamma,
                                                  opt.tau, opt.n_test, opt.seed);
    report = {{"v_mean", r.v_mean}, {"v1", r.v1},   {"v2", r.v2},
              {"gamma", r.gamma},   {"tau", r.tau}, {"n_test", r.n_test}};
    csv << "v_mean,v1,v2,gamma,tau,n_test\n"
        << fmt12(r.v_mean) << "," << fmt12(r.v1) << "," << fmt12(r.v2) << ","
        << fmt12(r.gamma) << "," << fmt12(r.tau) << "," << r.n_test << "\n";
  } else if (!opt.data_path.empty()) {
    const Dataset data = load_csv(opt.data_path, opt.schema.schema());
    std::unique_ptr<CensorSurvival> s_hat;
    if (opt.censor == "km")
      s_hat = std::make_unique<KaplanMeierCensor>(fit_km(data));
    else if (opt.censor == "cox")
      s_hat = std::make_unique<CoxCensor>(fit_cox(data));
    else
      throw DataError("unknown censoring estimator: " + opt.censor);
    const std::string crit = mj.value("criterion", "cvar");
    double alpha_hat = opt.alpha_hat;
    double c_hat = opt.c_hat;
    if (alpha_hat < 0.0)
      alpha_hat = crit == "cvar" ? mj.value("inner_scalar", 0.0) : 0.0;
    if (c_hat < 0.0)
      c_hat = crit == "bpoe" ? mj.value("inner_scalar", 0.0) : 0.0;
    const IpwMetrics m = evaluate_rule_ipw(data, rule_fn, *s_hat, opt.gamma,
                                           opt.tau, alpha_hat, c_hat);
    report = {{"v_mean", m.v_mean},     {"v1", m.v1},   {"m2", m.m2},
              {"gamma", opt.gamma},     {"tau", opt.tau},
              {"alpha_hat", alpha_hat}, {"c_hat", c_hat}};
    csv << "v_mean,v1,m2,gamma,tau\n"
        << fmt12(m.v_mean) << "," << fmt12(m.v1) << "," << fmt12(m.m2) << ","
        << fmt12(opt.gamma) << "," << fmt12(opt.tau) << "\n";
  } else {
    throw DataError("evaluate needs --scenario or --data");
  }
  write_text(dir / "eval.json", report.dump(2));
  write_text(dir / "eval.csv", csv.str());
  echo_config(app, dir);
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct ExperimentOptions {
  std::string scenario = "s1";
  int n = 500;
  int repeats = 20;
  int n_test = 10000;
  PipelineOptions pipeline;
  std::uint64_t seed = 1;
  int workers = 0;
  bool plot_data = false;
  std::string out;
};

int run_experiment(CLI::App& app, const ExperimentOptions& opt) {
  const fs::path dir = prepare_out_dir(opt.out);
  const ScenarioId sid = scenario_from_string(opt.scenario);
  const int workers = opt.workers > 0
                          ? opt.workers
                          : std::max(1u, std::thread::hardware_concurrency());

  const std::vector<std::string> names = {"cvar", "bpoe", "mean", "const+1",
                                          "const-1"};
  std::vector<MethodReport> methods(names.size());
  for (std::size_t m = 0; m < names.size(); ++m) {
    methods[m].method = names[m];
    methods[m].v_mean.resize(opt.repeats);
    methods[m].v1.resize(opt.repeats);
    methods[m].v2.resize(opt.repeats);
  }

  parallel_for(opt.repeats, workers, [&](int r) {
    const ScenarioSpec train_spec = make_scenario(
        sid, opt.n, Rng::stream(opt.seed, 1000 + r).next_u64());
    const Dataset train = generate(train_spec);

    std::vector<RuleFn> rules;
    for (const std::string& crit : {"cvar", "bpoe", "mean"}) {
      PipelineOptions po = opt.pipeline;
      po.criterion = crit;
      const FitPipelineConfig cfg =
          po.pipeline(Rng::stream(opt.seed, 2000 + r).next_u64());
      FittedMethod fitted = fit_method(train, cfg);
      auto rule = std::make_shared<TreatmentRule>(std::move(fitted.rule));
      rules.push_back(
          [rule](const Eigen::VectorXd& x) { return rule->decide(x); });
    }
    rules.push_back([](const Eigen::VectorXd&) { return 1; });
    rules.push_back([](const Eigen::VectorXd&) { return -1; });

    const std::uint64_t test_seed = Rng::stream(opt.seed, 3000 + r).next_u64();
    const ScenarioSpec eval_spec = make_scenario(sid, 1, 0);
    for (std::size_t m = 0; m < rules.size(); ++m) {
      const EvalReport rep = evaluate_rule_simulation(
          eval_spec, rules[m], opt.pipeline.gamma, opt.pipeline.tau,
          opt.n_test, test_seed);
      methods[m].v_mean[r] = rep.v_mean;
      methods[m].v1[r] = rep.v1;
      methods[m].v2[r] = rep.v2;
    }
  });

  write_experiment_reports(dir, methods, opt.plot_data);
  echo_config(app, dir);
  std::cout << "experiment " << opt.scenario << ": " << opt.repeats
            << " repeats written to " << dir.string() << "\n";
  return 0;
}

struct CvOptions {
  std::string data_path;
  SchemaOptions schema;
  PipelineOptions pipeline;
  int folds = 5;
  int repeats = 200;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
};

Dataset subset(const Dataset& data, const std::vector<int>& idx) {
  std::vector<Subject> subjects;
  Eigen::VectorXd prop(static_cast<Eigen::Index>(idx.size()));
  subjects.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    subjects.push_back(data[static_cast<std::size_t>(idx[k])]);
    prop[static_cast<Eigen::Index>(k)] =
        data.propensity_treated(static_cast<std::size_t>(idx[k]));
  }
  return Dataset(std::move(subjects), data.horizon(), std::move(prop));
}

int run_cv(CLI::App& app, const CvOptions& opt) {
  if (opt.data_path.empty()) throw DataError("--data is required");
  const fs::path dir = prepare_out_dir(opt.out);
  const Dataset data = load_csv(opt.data_path, opt.schema.schema());
  const int n = static_cast<int>(data.size());
  if (opt.folds < 2 || opt.folds > n)
    throw DataError("folds must be between 2 and n");
  const int workers = opt.workers > 0
                          ? opt.workers
                          : std::max(1u, std::thread::hardware_concurrency());

  const std::vector<std::string> names = {"cvar", "bpoe", "mean", "const+1",
                                          "const-1"};
  // Per method: cv-averaged (v_mean, v1, m2) per repeat.
  std::vector<MethodReport> methods(names.size());
  for (std::size_t m = 0; m < names.size(); ++m) {
    methods[m].method = names[m];
    methods[m].v_mean.resize(opt.repeats);
    methods[m].v1.resize(opt.repeats);
    methods[m].v2.resize(opt.repeats);  // holds m2 for the cv report
  }

  parallel_for(opt.repeats, workers, [&](int r) {
    Rng rng = Rng::stream(opt.seed, 100 + r);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

    std::vector<std::array<double, 3>> acc(names.size(), {0.0, 0.0, 0.0});
    for (int fold = 0; fold < opt.folds; ++fold) {
      std::vector<int> train_idx, test_idx;
      for (int i = 0; i < n; ++i)
        (i % opt.folds == fold ? test_idx : train_idx).push_back(perm[i]);
      const Dataset train = subset(data, train_idx);
      const Dataset test = subset(data, test_idx);

      std::unique_ptr<CensorSurvival> s_hat;
      if (opt.pipeline.censor == "km")
        s_hat = std::make_unique<KaplanMeierCensor>(fit_km(train));
      else
        s_hat = std::make_unique<CoxCensor>(fit_cox(train));

      std::vector<RuleFn> rules;
      double alpha_hat = 0.0, c_hat = 0.0;
      for (const std::string& crit : {"cvar", "bpoe", "mean"}) {
        PipelineOptions po = opt.pipeline;
        po.criterion = crit;
        const FitPipelineConfig cfg = po.pipeline(
            Rng::stream(opt.seed, 10000 + r * opt.folds + fold).next_u64());
        FittedMethod fitted = fit_method(train, cfg);
        if (crit == "cvar") alpha_hat = fitted.fit.inner_scalar;
        if (crit == "bpoe") c_hat = fitted.fit.inner_scalar;
        auto rule = std::make_shared<TreatmentRule>(std::move(fitted.rule));
        rules.push_back(
            [rule](const Eigen::VectorXd& x) { return rule->decide(x); });
      }
      rules.push_back([](const Eigen::VectorXd&) { return 1; });
      rules.push_back([](const Eigen::VectorXd&) { return -1; });

      for (std::size_t m = 0; m < rules.size(); ++m) {
        const IpwMetrics im =
            evaluate_rule_ipw(test, rules[m], *s_hat, opt.pipeline.gamma,
                              opt.pipeline.tau, alpha_hat, c_hat);
        acc[m][0] += im.v_mean;
        acc[m][1] += im.v1;
        acc[m][2] += im.m2;
      }
    }
    for (std::size_t m = 0; m < names.size(); ++m) {
      methods[m].v_mean[r] = acc[m][0] / opt.folds;
      methods[m].v1[r] = acc[m][1] / opt.folds;
      methods[m].v2[r] = acc[m][2] / opt.folds;
    }
  });

  std::ostringstream summary;
  summary << "method,v_mean,v_mean_sd,v1,v1_sd,m2,m2_sd\n";
  for (const auto& m : methods) {
    const auto sm = summarize(m.v_mean);
    const auto s1 = summarize(m.v1);
    const auto s2 = summarize(m.v2);
    summary << m.method << "," << fmt12(sm.mean) << "," << fmt12(sm.sd) << ","
            << fmt12(s1.mean) << "," << fmt12(s1.sd) << "," << fmt12(s2.mean)
            << "," << fmt12(s2.sd) << "\n";
  }
  write_text(dir / "cv_summary.csv", summary.str());
  echo_config(app, dir);
  std::cout << "cross-validation written to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Robust treatment-rule learning for censored survival data"};
  app.set_config("--config", "", "read options from a key=value file");
  app.require_subcommand(0, 1);

  SimulateOptions sim;
  CLI::App* sim_app =
      app.add_subcommand("simulate", "draw a scenario dataset as CSV");
  sim_app->configurable();
  sim_app->add_option("--scenario", sim.scenario, "s1 | s2 | s3 | illustrative");
  sim_app->add_option("--n", sim.n, "sample size");
  sim_app->add_option("--seed", sim.seed, "master seed");
  sim_app->add_option("--out", sim.out, "output directory");

  TrainOptions train;
  CLI::App* train_app =
      app.add_subcommand("train", "fit a treatment rule from a CSV");
  train_app->configurable();
  train_app->add_option("--data", train.data_path, "input CSV");
  train.schema.attach(train_app);
  train.pipeline.attach(train_app);
  train_app->add_option("--seed", train.seed, "master seed");
  train_app->add_option("--out", train.out, "output directory");

  EvaluateOptions eval;
  CLI::App* eval_app =
      app.add_subcommand("evaluate", "score a saved model");
  eval_app->configurable();
  eval_app->add_option("--model", eval.model_path, "model.json path");
  eval_app->add_option("--scenario", eval.scenario,
                       "evaluate on fresh potential outcomes");
  eval_app->add_option("--data", eval.data_path, "evaluate on a CSV via IPW");
  eval.schema.attach(eval_app);
  eval_app->add_option("--n-test", eval.n_test, "test draws");
  eval_app->add_option("--gamma", eval.gamma, "CVaR quantile level");
  eval_app->add_option("--tau", eval.tau, "buffered threshold");
  eval_app->add_option("--alpha-hat", eval.alpha_hat, "plug-in alpha");
  eval_app->add_option("--c-hat", eval.c_hat, "plug-in c");
  eval_app->add_option("--censor", eval.censor, "km | cox");
  eval_app->add_option("--seed", eval.seed, "master seed");
  eval_app->add_option("--out", eval.out, "output directory");

  ExperimentOptions exp;
  CLI::App* exp_app = app.add_subcommand(
      "experiment", "simulation study: generate, fit all methods, evaluate");
  exp_app->configurable();
  exp_app->add_option("--scenario", exp.scenario, "s1 | s2 | s3 | illustrative");
  exp_app->add_option("--n", exp.n, "training sample size");
  exp_app->add_option("--repeats", exp.repeats, "replications");
  exp_app->add_option("--n-test", exp.n_test, "test draws per replication");
  exp.pipeline.attach(exp_app, false);
  exp_app->add_option("--seed", exp.seed, "master seed");
  exp_app->add_option("--workers", exp.workers, "worker threads; 0 = auto");
  exp_app->add_flag("--plot-data", exp.plot_data, "emit boxplot quantiles");
  exp_app->add_option("--out", exp.out, "output directory");

  CvOptions cv;
  CLI::App* cv_app = app.add_subcommand(
      "cv", "repeated k-fold cross-validated IPW metrics on a CSV");
  cv_app->configurable();
  cv_app->add_option("--data", cv.data_path, "input CSV");
  cv.schema.attach(cv_app);
  cv.pipeline.attach(cv_app, false);
  cv_app->add_option("--folds", cv.folds, "number of folds");
  cv_app->add_option("--repeats", cv.repeats, "repeat count");
  cv_app->add_option("--seed", cv.seed, "master seed");
  cv_app->add_option("--workers", cv.workers, "worker threads; 0 = auto");
  cv_app->add_option("--out", cv.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (sim_app->parsed()) return run_simulate(app, sim);
    if (train_app->parsed()) return run_train(app, train);
    if (eval_app->parsed()) return run_evaluate(app, eval);
    if (exp_app->parsed()) return run_experiment(app, exp);
    if (cv_app->parsed()) return run_cv(app, cv);
    std::cerr << "usage error: no subcommand given (see --help)\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace survitr::cli
