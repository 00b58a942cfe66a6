#include "survitr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "survitr/errors.hpp"

namespace survitr {

double empirical_v_mean(std::span<const double> t) {
  if (t.empty()) throw DataError("empty sample");
  double acc = 0.0;
  for (const double v : t) acc += v;
  return acc / static_cast<double>(t.size());
}

double empirical_v1(std::span<const double> t, double gamma) {
  if (t.empty()) throw DataError("empty sample");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DataError("gamma must lie in (0,1)");
  std::vector<double> sorted(t.begin(), t.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // Right quantile: smallest order statistic with rank fraction > gamma.
  std::size_t k = static_cast<std::size_t>(
      std::floor(gamma * static_cast<double>(n)));
  if (static_cast<double>(k) / static_cast<double>(n) <= gamma) ++k;
  k = std::min(k, n);  // gamma < 1 keeps this at <= n already
  const double q = sorted[k - 1];
  double acc = 0.0;
  for (std::size_t i = 0; i < n && sorted[i] <= q; ++i) acc += sorted[i];
  return acc / static_cast<double>(n);
}

CvarOracleResult cvar_oracle(std::span<const double> t, double gamma) {
  if (t.empty()) throw DataError("empty sample");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DataError("gamma must lie in (0,1)");
  const double n = static_cast<double>(t.size());
  // Scan every candidate threshold; pick the smallest whose covered mass
  // exceeds gamma and average the covered values.  No sorting or order
  // statistics: a deliberately independent route to empirical_v1.
  double best_alpha = std::numeric_limits<double>::infinity();
  for (const double alpha : t) {
    std::size_t covered = 0;
    for (const double v : t) covered += (v <= alpha) ? 1 : 0;
    if (static_cast<double>(covered) / n > gamma && alpha < best_alpha)
      best_alpha = alpha;
  }
  double acc = 0.0;
  for (const double v : t) acc += (v <= best_alpha) ? v : 0.0;
  return {acc / n, best_alpha};
}

CvarOracleResult cvar_sup_weighted(std::span<const double> t,
                                   std::span<const double> w, double gamma) {
  if (t.empty() || t.size() != w.size())
    throw DataError("weighted sample shapes disagree");
  const double n = static_cast<double>(t.size());
  double wbar = 0.0;
  for (const double v : w) wbar += v;
  wbar /= n;

  CvarOracleResult best{-std::numeric_limits<double>::infinity(), 0.0};
  for (const double alpha : t) {
    double shortfall = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
      shortfall += w[i] * std::max(alpha - t[i], 0.0);
    const double value = alpha * gamma * wbar - shortfall / n;
    if (value > best.value ||
        (value == best.value && alpha < best.alpha)) {
      best.value = value;
      best.alpha = alpha;
    }
  }
  return best;
}

BpoeOracleResult bpoe_oracle(std::span<const double> t, double tau) {
  if (t.empty()) throw DataError("empty sample");
  const double n = static_cast<double>(t.size());
  const double tmin = *std::min_element(t.begin(), t.end());
  double mean = 0.0;
  for (const double v : t) mean += v;
  mean /= n;
  if (tau <= tmin) return {1.0, 0.0, 0.0};
  if (tau > mean) return {0.0, 0.0, 1.0};

  double best_inner = 1.0;  // c = 0 gives mean[max(0, 1)] = 1
  double best_c = 0.0;
  for (const double tj : t) {
    if (!(tj > tau)) continue;
    const double c = 1.0 / (tj - tau);
    double acc = 0.0;
    for (const double v : t) acc += std::max(c * (tau - v) + 1.0, 0.0);
    const double inner = acc / n;
    if (inner < best_inner || (inner == best_inner && c < best_c)) {
      best_inner = inner;
      best_c = c;
    }
  }
  return {1.0 - best_inner, best_c, best_inner};
}

double exceedance_at_adjusted_threshold(std::span<const double> t, double tau) {
  if (t.empty()) throw DataError("empty sample");
  std::vector<double> sorted(t.begin(), t.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // Largest threshold q among the order statistics whose lower-tail mean
  // stays at or below tau.
  double q = sorted.front();
  double acc = 0.0;
  bool found = false;
  for (std::size_t k = 0; k < n; ++k) {
    acc += sorted[k];
    if (acc / static_cast<double>(k + 1) <= tau) {
      q = sorted[k];
      found = true;
    }
  }
  if (!found) return 1.0;  // even the minimum exceeds tau
  std::size_t above = 0;
  for (const double v : sorted) above += (v > q) ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(n);
}

EvalReport evaluate_rule_simulation(const ScenarioSpec& spec, const RuleFn& rule,
                                    double gamma, double tau, int n_test,
                                    std::uint64_t seed) {
  const std::vector<double> t =
      generate_potential_outcomes(spec, rule, n_test, seed);
  EvalReport report;
  report.v_mean = empirical_v_mean(t);
  report.v1 = empirical_v1(t, gamma);
  report.v2 = bpoe_oracle(t, tau).value;
  report.gamma = gamma;
  report.tau = tau;
  report.n_test = n_test;
  return report;
}

IpwMetrics evaluate_rule_ipw(const Dataset& data, const RuleFn& rule,
                             const CensorSurvival& s_hat, double gamma,
                             double tau, double alpha_hat, double c_hat) {
  const double n = static_cast<double>(data.size());
  IpwMetrics m;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data[i];
    if (rule(s.x) != s.arm) continue;
    const double ipw = 1.0 / data.propensity(i);
    const double sc = s_hat.survival_left(s.time, s.x, s.arm);
    const double censor_w = s.event == 1 ? 1.0 / sc : 0.0;
    m.v_mean += ipw * censor_w * s.time;
    m.v1 += ipw * (alpha_hat * gamma -
                   censor_w * std::max(alpha_hat - s.time, 0.0));
    m.m2 += ipw * censor_w * std::max(c_hat * (tau - s.time) + 1.0, 0.0);
  }
  m.v_mean /= n;
  m.v1 /= n;
  m.m2 /= n;
  return m;
}

ReplicationStats summarize(std::span<const double> values) {
  ReplicationStats stats;
  stats.n = static_cast<int>(values.size());
  if (values.empty()) return stats;
  double acc = 0.0;
  for (const double v : values) acc += v;
  stats.mean = acc / stats.n;
  if (stats.n > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.sd = std::sqrt(ss / (stats.n - 1));
  }
  return stats;
}

}  // namespace survitr
