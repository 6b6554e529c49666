#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "organic/error.hpp"

namespace organic {

enum class Link { Identity, Logit };

/// Law of a scalar quantity: centered normal, or a finite support table.
struct ScalarLaw {
  enum class Kind { Normal, Discrete };
  Kind kind = Kind::Normal;
  double sd = 1.0;                 // Normal
  std::vector<double> values;      // Discrete
  std::vector<double> probs;

  bool discrete() const { return kind == Kind::Discrete; }
};

/// Covariate law: finite table of k-vectors, or k independent standard
/// normal components.
struct CovariateLaw {
  enum class Kind { Discrete, Normal };
  Kind kind = Kind::Discrete;
  std::vector<std::vector<double>> cells;  // Discrete: support points
  std::vector<double> probs;
  int normal_dim = 0;                      // Normal

  int dim() const {
    if (kind == Kind::Normal) return normal_dim;
    return cells.empty() ? 0 : static_cast<int>(cells.front().size());
  }
  bool discrete() const { return kind == Kind::Discrete; }
};

/// Mediator as a location shift per arm: M_a = c_coef'C + ctilde_coef*Ct
/// + shift[a] + e, with one noise law shared by both arms.
struct ShiftMediator {
  Eigen::VectorXd c_coef;
  double ctilde_coef = 0.0;
  std::array<double, 2> shift{0.0, 0.0};
  ScalarLaw noise;
};

/// Mediator as a conditional table P(M = values[v] | C cell, Ct cell, arm).
struct TableMediator {
  std::vector<double> values;
  // row index = (arm * n_c_cells + c_cell) * n_ct_cells + ct_cell
  std::vector<std::vector<double>> rows;
};

struct OutcomeArm {
  double intercept = 0.0;
  double m_coef = 0.0;
  Eigen::VectorXd c_coefs;
  double ctilde_coef = 0.0;
};

/// Conditional mean of Y given (M, C, Ct, arm) through the link; identity
/// adds normal noise, logit draws Bernoulli.
struct OutcomeModel {
  Link link = Link::Identity;
  double noise_sd = 1.0;
  std::array<OutcomeArm, 2> arms;
};

/// How arm 2 of a three-arm design produces its mediator.
enum class InterventionMechanism { IndependentRedraw, CoupledNoise, SetToM0 };

struct Scenario {
  CovariateLaw covariates;
  std::optional<ScalarLaw> unobserved;  // common cause Ct; never emitted to CSV
  std::variant<ShiftMediator, TableMediator> mediator;
  OutcomeModel outcome;
  InterventionMechanism mechanism = InterventionMechanism::IndependentRedraw;

  /// Throws InvalidScenario on any structural defect (probabilities not
  /// summing to one, missing table rows, dimension mismatches, ...).
  void validate() const;

  bool mediator_is_table() const { return std::holds_alternative<TableMediator>(mediator); }

  /// Number of unobserved-cause cells for table indexing (1 when absent).
  int n_ct_cells() const;

  static Scenario load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  static Scenario from_json_text(const std::string& text);
  std::string to_json_text() const;
};

std::string link_name(Link link);
Link link_from_name(const std::string& name);

}  // namespace organic
