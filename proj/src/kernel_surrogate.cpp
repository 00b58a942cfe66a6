#include "survitr/kernel_surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "survitr/errors.hpp"
#include "json.hpp"

namespace survitr {

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, double bandwidth) {
  if (!(bandwidth > 0.0)) throw DataError("bandwidth must be positive");
  const Eigen::Index n = x.rows();
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (x.row(i) - x.row(j)).squaredNorm();
      k(i, j) = k(j, i) = std::exp(-d2 * inv);
    }
  }
  return k;
}

Eigen::VectorXd kernel_column(const Eigen::MatrixXd& train_x,
                              const Eigen::VectorXd& x, double bandwidth) {
  if (!(bandwidth > 0.0)) throw DataError("bandwidth must be positive");
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  Eigen::VectorXd k(train_x.rows());
  for (Eigen::Index j = 0; j < train_x.rows(); ++j)
    k[j] = std::exp(-(train_x.row(j).transpose() - x).squaredNorm() * inv);
  return k;
}

double median_pairwise_distance(const Eigen::MatrixXd& x) {
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(x.rows()) * (x.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      const double d = (x.row(i) - x.row(j)).norm();
      if (d > 0.0) dist.push_back(d);
    }
  if (dist.empty()) return 1.0;
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  return dist[mid];
}

double TreatmentRule::margin(const Eigen::VectorXd& x) const {
  return kernel_column(kernel.train_x, x, kernel.bandwidth).dot(beta);
}

std::string TreatmentRule::to_json() const {
  nlohmann::json j;
  j["bandwidth"] = kernel.bandwidth;
  j["beta"] = std::vector<double>(beta.data(), beta.data() + beta.size());
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < kernel.train_x.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(kernel.train_x.cols()));
    for (Eigen::Index k = 0; k < kernel.train_x.cols(); ++k)
      r[static_cast<std::size_t>(k)] = kernel.train_x(i, k);
    rows.push_back(std::move(r));
  }
  j["train_x"] = rows;
  return j.dump(2);
}

TreatmentRule TreatmentRule::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TreatmentRule rule;
  rule.kernel.bandwidth = j.at("bandwidth").get<double>();
  const auto beta = j.at("beta").get<std::vector<double>>();
  rule.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                                static_cast<Eigen::Index>(beta.size()));
  const auto rows = j.at("train_x").get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw DataError("model file has no training covariates");
  rule.kernel.train_x.resize(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw DataError("ragged train_x in model file");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      rule.kernel.train_x(static_cast<Eigen::Index>(i),
                          static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  if (rule.beta.size() != rule.kernel.train_x.rows())
    throw DataError("beta length does not match training covariates");
  return rule;
}

}  // namespace survitr
