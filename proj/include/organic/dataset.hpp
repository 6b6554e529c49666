#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "organic/error.hpp"

namespace organic {

enum class ArmKind { TwoArm, ThreeArm };

/// Column names used for CSV ingestion and emission. Emitted column order is
/// fixed: covariates, confounders, arm, mediator, outcome.
struct ColumnSchema {
  std::vector<std::string> covariate_names;   // c1..ck
  std::vector<std::string> confounder_names;  // z1..zq
  std::string arm_name = "a";                 // "a" (two-arm) or "r" (three-arm)
  std::string mediator_name = "m";
  std::string outcome_name = "y";

  static ColumnSchema defaults(int n_covariates, int n_confounders, ArmKind kind);

  /// Throws InvalidSchema when names are empty or collide.
  void validate() const;
};

/// Immutable table of i.i.d. units. Every construction path runs the full
/// invariant check (equal column lengths, n >= 1, arm values in range, finite
/// entries), so a Dataset in hand is always valid and safe to share across
/// threads.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd covariates, Eigen::MatrixXd confounders,
          std::vector<int> arm, Eigen::VectorXd mediator,
          Eigen::VectorXd outcome, ArmKind kind);

  Dataset(Eigen::MatrixXd covariates, Eigen::MatrixXd confounders,
          std::vector<int> arm, Eigen::VectorXd mediator,
          Eigen::VectorXd outcome, ArmKind kind, ColumnSchema schema);

  int n() const { return static_cast<int>(mediator_.size()); }
  int n_covariates() const { return static_cast<int>(covariates_.cols()); }
  int n_confounders() const { return static_cast<int>(confounders_.cols()); }

  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::MatrixXd& confounders() const { return confounders_; }
  const std::vector<int>& arm() const { return arm_; }
  const Eigen::VectorXd& mediator() const { return mediator_; }
  const Eigen::VectorXd& outcome() const { return outcome_; }
  ArmKind kind() const { return kind_; }
  const ColumnSchema& schema() const { return schema_; }

  /// Unit counts per arm label (size 2 or 3 by kind).
  std::vector<int> arm_counts() const;

  /// New dataset with the given rows, in the given order (repeats allowed;
  /// used by the bootstrap).
  Dataset select_rows(const std::vector<int>& rows) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  void check_invariants() const;

  Eigen::MatrixXd covariates_;
  Eigen::MatrixXd confounders_;
  std::vector<int> arm_;
  Eigen::VectorXd mediator_;
  Eigen::VectorXd outcome_;
  ArmKind kind_;
  ColumnSchema schema_;
};

/// Classifies header names into a schema: "a"/"r" arm, "m" mediator, "y"
/// outcome, "c*" covariates, "z*" confounders.
ColumnSchema infer_schema(const std::vector<std::string>& header);

Dataset read_csv(const std::filesystem::path& path, const ColumnSchema& schema);
/// Schema inferred from the header row.
Dataset read_csv(const std::filesystem::path& path);

void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);

}  // namespace organic
