#pragma once

#include <optional>
#include <vector>

#include "organic/dataset.hpp"
#include "organic/numerics.hpp"
#include "organic/scenario.hpp"

namespace organic {

enum class EstimationMethod { Nonparametric, Semiparametric };
enum class MediatorModelKind { None, Shift };

struct EstimatorConfig {
  EstimationMethod method = EstimationMethod::Nonparametric;
  Link outcome_link = Link::Identity;
  MediatorModelKind mediator_model = MediatorModelKind::None;
  bool use_confounders = false;  // condition on (C,Z) jointly
  bool recode = false;           // swap arm labels before estimating
  int max_discrete_levels = 100; // discreteness guard for stratified paths
  LogisticOptions logistic;

  void validate() const;
};

struct EstimateDiagnostics {
  int n_strata = 0;  // covariate (x confounder) strata
  int n_cells = 0;   // (stratum, mediator) cells entering the plug-in sum
  std::optional<RegressionFit> mediator_fit;
  std::optional<RegressionFit> outcome_fit;
};

/// Effect decomposition. direct = e_y1_i1 - e_y0, indirect = e_y1 - e_y1_i1,
/// and total is stored as direct + indirect so the decomposition identity is
/// bitwise exact.
struct EffectEstimate {
  double e_y0 = 0.0;
  double e_y1 = 0.0;
  double e_y1_i1 = 0.0;
  double direct = 0.0;
  double indirect = 0.0;
  double total = 0.0;
  std::vector<int> n_by_arm;
  EstimateDiagnostics diagnostics;
};

/// Plug-in mediation formula for a randomized two-arm trial with discrete
/// mediator and covariates: standardizes the treated outcome means over the
/// untreated mediator law per stratum and the pooled covariate frequencies.
EffectEstimate estimate_nonparametric(const Dataset& data, const EstimatorConfig& config);

/// Shift-model estimator: OLS mediator regression with treatment interaction,
/// outcome regression on treated units only, then the treated-sample average
/// of the fitted outcome model at the shifted-back mediator.
EffectEstimate estimate_semiparametric(const Dataset& data, const EstimatorConfig& config);

/// Mediation formula for observational data, conditioning on (C,Z) jointly;
/// arm means are replaced by standardization over the pooled empirical (C,Z)
/// law. With no confounder columns this is exactly the two-arm estimator.
EffectEstimate estimate_observational(const Dataset& data, const EstimatorConfig& config);

/// Mediator law supplied for a hypothetical future treatment: a conditional
/// table per covariate cell, or a location shift m -> m + offset + c_coef'C.
struct FutureMediatorLaw {
  enum class Kind { Discrete, Shift };
  Kind kind = Kind::Discrete;
  // Discrete
  std::vector<double> values;
  std::vector<std::vector<double>> cells;  // covariate keys
  std::vector<std::vector<double>> probs;  // per cell, over values
  // Shift
  double offset = 0.0;
  Eigen::VectorXd c_coef;
};

/// Mean outcome under a future treatment: standardizes the outcome
/// regression fitted on reference-arm data over the supplied mediator law
/// and the empirical covariate law.
double estimate_future_treatment(const Dataset& data, const FutureMediatorLaw& law,
                                 const EstimatorConfig& config);

/// Swaps arm labels 0 and 1, leaving every other column untouched.
Dataset recode_treatment(const Dataset& data);

/// Applies recoding when configured and dispatches on method/confounders.
EffectEstimate run_estimator(const Dataset& data, const EstimatorConfig& config);

}  // namespace organic
