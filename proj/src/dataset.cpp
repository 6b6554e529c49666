#include "organic/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace organic {

namespace {

std::string cell_location(int row, const std::string& col) {
  return "row " + std::to_string(row) + ", column '" + col + "'";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, int row, const std::string& col) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error("NonNumericCell", "cannot parse '" + s + "' at " + cell_location(row, col));
  }
  return value;
}

int max_arm_value(ArmKind kind) { return kind == ArmKind::TwoArm ? 1 : 2; }

}  // namespace

ColumnSchema ColumnSchema::defaults(int n_covariates, int n_confounders, ArmKind kind) {
  ColumnSchema schema;
  for (int j = 0; j < n_covariates; ++j) schema.covariate_names.push_back("c" + std::to_string(j + 1));
  for (int j = 0; j < n_confounders; ++j) schema.confounder_names.push_back("z" + std::to_string(j + 1));
  schema.arm_name = kind == ArmKind::TwoArm ? "a" : "r";
  return schema;
}

void ColumnSchema::validate() const {
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (name.empty()) throw Error("InvalidSchema", "empty column name");
    if (!seen.insert(name).second) throw Error("InvalidSchema", "duplicate column name '" + name + "'");
  };
  for (const auto& name : covariate_names) add(name);
  for (const auto& name : confounder_names) add(name);
  add(arm_name);
  add(mediator_name);
  add(outcome_name);
}

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::MatrixXd confounders,
                 std::vector<int> arm, Eigen::VectorXd mediator,
                 Eigen::VectorXd outcome, ArmKind kind)
    : covariates_(std::move(covariates)),
      confounders_(std::move(confounders)),
      arm_(std::move(arm)),
      mediator_(std::move(mediator)),
      outcome_(std::move(outcome)),
      kind_(kind),
      schema_(ColumnSchema::defaults(static_cast<int>(covariates_.cols()),
                                     static_cast<int>(confounders_.cols()), kind)) {
  check_invariants();
}

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::MatrixXd confounders,
                 std::vector<int> arm, Eigen::VectorXd mediator,
                 Eigen::VectorXd outcome, ArmKind kind, ColumnSchema schema)
    : covariates_(std::move(covariates)),
      confounders_(std::move(confounders)),
      arm_(std::move(arm)),
      mediator_(std::move(mediator)),
      outcome_(std::move(outcome)),
      kind_(kind),
      schema_(std::move(schema)) {
  check_invariants();
}

void Dataset::check_invariants() const {
  const auto n = static_cast<Eigen::Index>(arm_.size());
  if (n < 1) throw Error("InvalidDataset", "dataset must have at least one row");
  if (mediator_.size() != n || outcome_.size() != n ||
      (covariates_.cols() > 0 && covariates_.rows() != n) ||
      (confounders_.cols() > 0 && confounders_.rows() != n)) {
    throw Error("InvalidDataset", "columns have unequal lengths");
  }
  const int max_arm = max_arm_value(kind_);
  for (std::size_t i = 0; i < arm_.size(); ++i) {
    if (arm_[i] < 0 || arm_[i] > max_arm) {
      throw Error("InvalidArmValue",
                  "arm value " + std::to_string(arm_[i]) + " at row " + std::to_string(i));
    }
  }
  if (!mediator_.allFinite() || !outcome_.allFinite() ||
      (covariates_.size() > 0 && !covariates_.allFinite()) ||
      (confounders_.size() > 0 && !confounders_.allFinite())) {
    throw Error("InvalidDataset", "non-finite value in dataset");
  }
  schema_.validate();
  if (static_cast<int>(schema_.covariate_names.size()) != covariates_.cols() ||
      static_cast<int>(schema_.confounder_names.size()) != confounders_.cols()) {
    throw Error("InvalidSchema", "schema names do not match column counts");
  }
}

std::vector<int> Dataset::arm_counts() const {
  std::vector<int> counts(max_arm_value(kind_) + 1, 0);
  for (int a : arm_) counts[a] += 1;
  return counts;
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd cov(m, covariates_.cols());
  Eigen::MatrixXd conf(m, confounders_.cols());
  std::vector<int> arm(rows.size());
  Eigen::VectorXd med(m), out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= n()) throw Error("InvalidArgument", "row index out of range");
    if (covariates_.cols() > 0) cov.row(i) = covariates_.row(r);
    if (confounders_.cols() > 0) conf.row(i) = confounders_.row(r);
    arm[static_cast<std::size_t>(i)] = arm_[static_cast<std::size_t>(r)];
    med(i) = mediator_(r);
    out(i) = outcome_(r);
  }
  return Dataset(std::move(cov), std::move(conf), std::move(arm),
                 std::move(med), std::move(out), kind_, schema_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.kind_ == b.kind_ && a.arm_ == b.arm_ &&
         a.covariates_.rows() == b.covariates_.rows() &&
         a.covariates_.cols() == b.covariates_.cols() &&
         a.covariates_ == b.covariates_ &&
         a.confounders_.cols() == b.confounders_.cols() &&
         a.confounders_ == b.confounders_ &&
         a.mediator_ == b.mediator_ && a.outcome_ == b.outcome_ &&
         a.schema_.covariate_names == b.schema_.covariate_names &&
         a.schema_.confounder_names == b.schema_.confounder_names &&
         a.schema_.arm_name == b.schema_.arm_name &&
         a.schema_.mediator_name == b.schema_.mediator_name &&
         a.schema_.outcome_name == b.schema_.outcome_name;
}

ColumnSchema infer_schema(const std::vector<std::string>& header) {
  ColumnSchema schema;
  bool have_arm = false;
  for (const auto& name : header) {
    if (name == "a" || name == "r") {
      schema.arm_name = name;
      have_arm = true;
    } else if (name == "m") {
      schema.mediator_name = name;
    } else if (name == "y") {
      schema.outcome_name = name;
    } else if (!name.empty() && name.front() == 'c') {
      schema.covariate_names.push_back(name);
    } else if (!name.empty() && name.front() == 'z') {
      schema.confounder_names.push_back(name);
    } else {
      throw Error("MissingColumn", "cannot classify column '" + name + "'");
    }
  }
  if (!have_arm) throw Error("MissingColumn", "no arm column 'a' or 'r' in header");
  schema.validate();
  return schema;
}

Dataset read_csv(const std::filesystem::path& path, const ColumnSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error("EmptyFile", "'" + path.string() + "' has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  std::unordered_map<std::string, int> position;
  for (int j = 0; j < static_cast<int>(header.size()); ++j) position[header[j]] = j;
  auto locate = [&](const std::string& name) {
    auto it = position.find(name);
    if (it == position.end()) throw Error("MissingColumn", "column '" + name + "' not in header");
    return it->second;
  };

  std::vector<int> cov_pos, conf_pos;
  for (const auto& name : schema.covariate_names) cov_pos.push_back(locate(name));
  for (const auto& name : schema.confounder_names) conf_pos.push_back(locate(name));
  const int arm_pos = locate(schema.arm_name);
  const int med_pos = locate(schema.mediator_name);
  const int out_pos = locate(schema.outcome_name);

  const ArmKind kind = schema.arm_name == "r" ? ArmKind::ThreeArm : ArmKind::TwoArm;
  const int max_arm = max_arm_value(kind);

  std::vector<std::vector<double>> cov_rows;
  std::vector<std::vector<double>> conf_rows;
  std::vector<int> arm;
  std::vector<double> med, out;

  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw Error("MalformedRow", "row " + std::to_string(row) + " has " +
                                      std::to_string(fields.size()) + " fields, expected " +
                                      std::to_string(header.size()));
    }
    std::vector<double> c(cov_pos.size()), z(conf_pos.size());
    for (std::size_t j = 0; j < cov_pos.size(); ++j)
      c[j] = parse_double(fields[cov_pos[j]], row, schema.covariate_names[j]);
    for (std::size_t j = 0; j < conf_pos.size(); ++j)
      z[j] = parse_double(fields[conf_pos[j]], row, schema.confounder_names[j]);

    const double arm_raw = parse_double(fields[arm_pos], row, schema.arm_name);
    const int arm_value = static_cast<int>(arm_raw);
    if (arm_raw != static_cast<double>(arm_value) || arm_value < 0 || arm_value > max_arm) {
      throw Error("InvalidArmValue", "arm value '" + fields[arm_pos] + "' at row " +
                                         std::to_string(row));
    }
    arm.push_back(arm_value);
    med.push_back(parse_double(fields[med_pos], row, schema.mediator_name));
    out.push_back(parse_double(fields[out_pos], row, schema.outcome_name));
    cov_rows.push_back(std::move(c));
    conf_rows.push_back(std::move(z));
  }
  if (row == 0) throw Error("EmptyFile", "'" + path.string() + "' has no data rows");

  const auto n = static_cast<Eigen::Index>(row);
  Eigen::MatrixXd covariates(n, static_cast<Eigen::Index>(cov_pos.size()));
  Eigen::MatrixXd confounders(n, static_cast<Eigen::Index>(conf_pos.size()));
  Eigen::VectorXd mediator(n), outcome(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < covariates.cols(); ++j) covariates(i, j) = cov_rows[i][j];
    for (Eigen::Index j = 0; j < confounders.cols(); ++j) confounders(i, j) = conf_rows[i][j];
    mediator(i) = med[static_cast<std::size_t>(i)];
    outcome(i) = out[static_cast<std::size_t>(i)];
  }
  return Dataset(std::move(covariates), std::move(confounders), std::move(arm),
                 std::move(mediator), std::move(outcome), kind, schema);
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("EmptyFile", "'" + path.string() + "' has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return read_csv(path, infer_schema(split_line(line)));
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot open '" + path.string() + "' for writing");

  const ColumnSchema& schema = data.schema();
  std::string header;
  for (const auto& name : schema.covariate_names) header += name + ",";
  for (const auto& name : schema.confounder_names) header += name + ",";
  header += schema.arm_name + "," + schema.mediator_name + "," + schema.outcome_name;
  out << header << "\n";

  for (int i = 0; i < data.n(); ++i) {
    std::string row;
    for (int j = 0; j < data.n_covariates(); ++j) row += format_double(data.covariates()(i, j)) + ",";
    for (int j = 0; j < data.n_confounders(); ++j) row += format_double(data.confounders()(i, j)) + ",";
    row += std::to_string(data.arm()[static_cast<std::size_t>(i)]);
    row += "," + format_double(data.mediator()(i));
    row += "," + format_double(data.outcome()(i));
    out << row << "\n";
  }
  if (!out) throw Error("IoError", "write to '" + path.string() + "' failed");
}

}  // namespace organic
