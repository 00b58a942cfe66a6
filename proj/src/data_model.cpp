#include "survitr/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "survitr/censor_est.hpp"

namespace survitr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& cell, const std::string& column, int row) {
  const std::string t = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw DataError("non-numeric value '" + t + "' in column '" + column +
                    "' at row " + std::to_string(row));
  }
  return value;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset::Dataset(std::vector<Subject> subjects, double horizon,
                 double propensity_treated)
    : subjects_(std::move(subjects)),
      horizon_(horizon),
      propensity_treated_(Eigen::VectorXd::Constant(
          static_cast<Eigen::Index>(subjects_.size()), propensity_treated)) {
  validate_and_truncate();
}

Dataset::Dataset(std::vector<Subject> subjects, double horizon,
                 Eigen::VectorXd propensity_treated)
    : subjects_(std::move(subjects)),
      horizon_(horizon),
      propensity_treated_(std::move(propensity_treated)) {
  if (propensity_treated_.size() != static_cast<Eigen::Index>(subjects_.size()))
    throw DataError("propensity vector length does not match subject count");
  validate_and_truncate();
}

void Dataset::validate_and_truncate() {
  if (subjects_.empty()) throw DataError("dataset is empty");
  if (!(horizon_ > 0.0)) throw DataError("horizon must be positive");
  dim_ = static_cast<int>(subjects_.front().x.size());
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    Subject& s = subjects_[i];
    const std::string at = " at row " + std::to_string(i + 1);
    if (static_cast<int>(s.x.size()) != dim_)
      throw DataError("covariate dimension mismatch" + at);
    if (!s.x.allFinite()) throw DataError("non-finite covariate" + at);
    if (s.arm != 1 && s.arm != -1) throw DataError("arm outside {+1,-1}" + at);
    if (!(s.time >= 0.0) || !std::isfinite(s.time))
      throw DataError("negative time" + at);
    if (s.event != 0 && s.event != 1)
      throw DataError("event indicator outside {0,1}" + at);
    if (s.time > horizon_) {
      // Follow-up past the restriction time: the restricted survival time is
      // exactly the horizon.
      s.time = horizon_;
      s.event = 1;
    }
    const double p = propensity_treated_[static_cast<Eigen::Index>(i)];
    if (!(p > 0.0 && p < 1.0))
      throw DataError("propensity outside (0,1)" + at);
  }
}

double Dataset::propensity(std::size_t i) const {
  const double p = propensity_treated_[static_cast<Eigen::Index>(i)];
  return subjects_[i].arm == 1 ? p : 1.0 - p;
}

Eigen::MatrixXd Dataset::covariate_matrix() const {
  Eigen::MatrixXd x(subjects_.size(), dim_);
  for (std::size_t i = 0; i < subjects_.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = subjects_[i].x.transpose();
  return x;
}

Eigen::VectorXd Dataset::times() const {
  Eigen::VectorXd v(subjects_.size());
  for (std::size_t i = 0; i < subjects_.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = subjects_[i].time;
  return v;
}

Eigen::VectorXd Dataset::arms() const {
  Eigen::VectorXd v(subjects_.size());
  for (std::size_t i = 0; i < subjects_.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = subjects_[i].arm;
  return v;
}

Eigen::VectorXd Dataset::events() const {
  Eigen::VectorXd v(subjects_.size());
  for (std::size_t i = 0; i < subjects_.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = subjects_[i].event;
  return v;
}

std::vector<WeightedSubject> attach_weights(const Dataset& data,
                                            const CensorSurvival& s_hat,
                                            double floor) {
  std::vector<WeightedSubject> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data[i];
    double w = 0.0;
    if (s.event == 1) {
      const double sc =
          std::max(s_hat.survival_left(s.time, s.x, s.arm), floor);
      w = 1.0 / (data.propensity(i) * sc);
    }
    out.push_back({s, w});
  }
  return out;
}

Eigen::VectorXd weight_vector(const std::vector<WeightedSubject>& ws) {
  Eigen::VectorXd v(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = ws[i].w;
  return v;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  if (!(schema.horizon > 0.0))
    throw DataError("schema horizon must be positive");

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("missing column '" + name + "' in " + path);
    return static_cast<int>(it - header.begin());
  };

  std::vector<int> cov_idx;
  for (const auto& c : schema.covariate_columns) cov_idx.push_back(column_index(c));
  if (cov_idx.empty()) throw DataError("no covariate columns configured");
  const int arm_idx = column_index(schema.arm_column);
  const int time_idx = column_index(schema.time_column);
  const int event_idx = column_index(schema.event_column);
  const int prop_idx = schema.propensity_column
                           ? column_index(*schema.propensity_column)
                           : -1;

  std::vector<Subject> subjects;
  std::vector<double> propensity;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("wrong cell count at row " + std::to_string(row));

    Subject s;
    s.x.resize(static_cast<Eigen::Index>(cov_idx.size()));
    for (std::size_t k = 0; k < cov_idx.size(); ++k)
      s.x[static_cast<Eigen::Index>(k)] =
          parse_number(cells[cov_idx[k]], schema.covariate_columns[k], row);

    const std::string arm_label = trim(cells[arm_idx]);
    const auto it = schema.arm_mapping.find(arm_label);
    if (it == schema.arm_mapping.end())
      throw DataError("unmapped arm value '" + arm_label + "' at row " +
                      std::to_string(row));
    s.arm = it->second;
    if (s.arm != 1 && s.arm != -1)
      throw DataError("arm mapping must target +1 or -1 (row " +
                      std::to_string(row) + ")");

    s.time = parse_number(cells[time_idx], schema.time_column, row);
    if (s.time < 0.0)
      throw DataError("negative time at row " + std::to_string(row));

    const double ev = parse_number(cells[event_idx], schema.event_column, row);
    if (ev != 0.0 && ev != 1.0)
      throw DataError("event indicator outside {0,1} at row " +
                      std::to_string(row));
    s.event = static_cast<int>(ev);

    if (prop_idx >= 0) {
      const double p =
          parse_number(cells[prop_idx], *schema.propensity_column, row);
      if (!(p > 0.0 && p < 1.0))
        throw DataError("propensity outside (0,1) at row " +
                        std::to_string(row));
      propensity.push_back(p);
    }
    subjects.push_back(std::move(s));
  }
  if (subjects.empty()) throw DataError("no data rows in " + path);

  if (prop_idx >= 0) {
    Eigen::VectorXd p(propensity.size());
    for (std::size_t i = 0; i < propensity.size(); ++i)
      p[static_cast<Eigen::Index>(i)] = propensity[i];
    return Dataset(std::move(subjects), schema.horizon, std::move(p));
  }
  return Dataset(std::move(subjects), schema.horizon,
                 schema.propensity_treated);
}

void write_csv(const Dataset& data, const std::string& path,
               bool with_propensity) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (int k = 0; k < data.dim(); ++k) out << "x" << (k + 1) << ",";
  out << "arm,time,event";
  if (with_propensity) out << ",propensity";
  out << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data[i];
    for (int k = 0; k < data.dim(); ++k)
      out << format_number(s.x[k]) << ",";
    out << s.arm << "," << format_number(s.time) << "," << s.event;
    if (with_propensity) out << "," << format_number(data.propensity_treated(i));
    out << "\n";
  }
}

CsvSchema standard_schema(int dim, double horizon, bool with_propensity) {
  CsvSchema schema;
  schema.covariate_columns.clear();
  for (int k = 0; k < dim; ++k)
    schema.covariate_columns.push_back("x" + std::to_string(k + 1));
  schema.horizon = horizon;
  if (with_propensity) schema.propensity_column = "propensity";
  return schema;
}

}  // namespace survitr
