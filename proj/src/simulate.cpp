#include "organic/simulate.hpp"

#include <cmath>

#include "organic/rng.hpp"
#include "organic/stats.hpp"

namespace organic {

namespace {

// Fixed draw-slot layout per unit stream; keeps datasets reproducible
// independent of which arm or mediator branch a unit lands in.
constexpr std::uint64_t kSlotArm = 0;
constexpr std::uint64_t kSlotCovariateBase = 1;  // 1..16
constexpr std::uint64_t kSlotUnobserved = 17;
constexpr std::uint64_t kSlotMediator = 18;
constexpr std::uint64_t kSlotMediatorRedraw = 19;
constexpr std::uint64_t kSlotOutcome = 20;

int invert_discrete_cdf(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  for (std::size_t v = 0; v < probs.size(); ++v) {
    cum += probs[v];
    if (u < cum) return static_cast<int>(v);
  }
  return static_cast<int>(probs.size()) - 1;
}

double draw_scalar(const ScalarLaw& law, double u) {
  if (law.kind == ScalarLaw::Kind::Normal) return law.sd * stats::normal_quantile(u);
  return law.values[static_cast<std::size_t>(invert_discrete_cdf(law.probs, u))];
}

int mediator_table_row(const Scenario& scenario, int arm, int c_cell, int ct_cell) {
  const int n_c = std::max<int>(1, static_cast<int>(scenario.covariates.cells.size()));
  return (arm * n_c + std::max(c_cell, 0)) * scenario.n_ct_cells() + ct_cell;
}

struct UnitContext {
  Eigen::VectorXd c;
  int c_cell = -1;   // discrete covariate cell, -1 for continuous laws
  double ct = 0.0;   // unobserved cause value
  int ct_cell = 0;
};

UnitContext draw_context(const Scenario& scenario, const CounterStream& stream) {
  UnitContext ctx;
  const int k = scenario.covariates.dim();
  ctx.c.resize(k);
  if (scenario.covariates.discrete()) {
    ctx.c_cell = invert_discrete_cdf(scenario.covariates.probs, stream.uniform(kSlotCovariateBase));
    const auto& cell = scenario.covariates.cells[static_cast<std::size_t>(ctx.c_cell)];
    for (int j = 0; j < k; ++j) ctx.c(j) = cell[static_cast<std::size_t>(j)];
  } else {
    for (int j = 0; j < k; ++j) {
      ctx.c(j) = stats::normal_quantile(stream.uniform(kSlotCovariateBase + static_cast<std::uint64_t>(j)));
    }
  }
  if (scenario.unobserved) {
    const double u = stream.uniform(kSlotUnobserved);
    if (scenario.unobserved->discrete()) {
      ctx.ct_cell = invert_discrete_cdf(scenario.unobserved->probs, u);
      ctx.ct = scenario.unobserved->values[static_cast<std::size_t>(ctx.ct_cell)];
    } else {
      ctx.ct = draw_scalar(*scenario.unobserved, u);
    }
  }
  return ctx;
}

// mediator_arm is the law to draw from; arm 2 passes 0 here.
double draw_mediator(const Scenario& scenario, const UnitContext& ctx, int mediator_arm,
                     double u) {
  if (const auto* shift = std::get_if<ShiftMediator>(&scenario.mediator)) {
    const double base = shift->c_coef.dot(ctx.c) + shift->ctilde_coef * ctx.ct;
    return base + shift->shift[static_cast<std::size_t>(mediator_arm)] + draw_scalar(shift->noise, u);
  }
  const auto& table = std::get<TableMediator>(scenario.mediator);
  const int row = mediator_table_row(scenario, mediator_arm, ctx.c_cell, ctx.ct_cell);
  const int v = invert_discrete_cdf(table.rows[static_cast<std::size_t>(row)], u);
  return table.values[static_cast<std::size_t>(v)];
}

double outcome_mean(const Scenario& scenario, const UnitContext& ctx, int outcome_arm, double m) {
  const auto& arm = scenario.outcome.arms[static_cast<std::size_t>(outcome_arm)];
  const double eta = arm.intercept + arm.m_coef * m + arm.c_coefs.dot(ctx.c) + arm.ctilde_coef * ctx.ct;
  return scenario.outcome.link == Link::Identity ? eta : stats::sigmoid(eta);
}

double draw_outcome(const Scenario& scenario, const UnitContext& ctx, int outcome_arm, double m,
                    double u) {
  if (scenario.outcome.link == Link::Identity) {
    const auto& arm = scenario.outcome.arms[static_cast<std::size_t>(outcome_arm)];
    const double eta = arm.intercept + arm.m_coef * m + arm.c_coefs.dot(ctx.c) + arm.ctilde_coef * ctx.ct;
    return eta + scenario.outcome.noise_sd * stats::normal_quantile(u);
  }
  return u < outcome_mean(scenario, ctx, outcome_arm, m) ? 1.0 : 0.0;
}

Dataset assemble(const Scenario& scenario, int n, ArmKind kind,
                 const std::function<int(const CounterStream&)>& draw_arm,
                 std::uint64_t seed) {
  const int k = scenario.covariates.dim();
  Eigen::MatrixXd covariates(n, k);
  Eigen::MatrixXd confounders(n, 0);
  std::vector<int> arm(static_cast<std::size_t>(n));
  Eigen::VectorXd mediator(n), outcome(n);

  for (int i = 0; i < n; ++i) {
    const CounterStream stream(seed, static_cast<std::uint64_t>(i));
    const int r = draw_arm(stream);
    const UnitContext ctx = draw_context(scenario, stream);

    double m = 0.0;
    if (r < 2) {
      m = draw_mediator(scenario, ctx, r, stream.uniform(kSlotMediator));
    } else if (scenario.mechanism == InterventionMechanism::IndependentRedraw) {
      m = draw_mediator(scenario, ctx, 0, stream.uniform(kSlotMediatorRedraw));
    } else {
      // CoupledNoise / SetToM0: arm-0 law re-using the unit's own noise
      // realization (shared uniform through the inverse CDF).
      m = draw_mediator(scenario, ctx, 0, stream.uniform(kSlotMediator));
    }

    const int outcome_arm = r == 2 ? 1 : r;
    const double y = draw_outcome(scenario, ctx, outcome_arm, m, stream.uniform(kSlotOutcome));

    covariates.row(i) = ctx.c.transpose();
    arm[static_cast<std::size_t>(i)] = r;
    mediator(i) = m;
    outcome(i) = y;
  }
  return Dataset(std::move(covariates), std::move(confounders), std::move(arm),
                 std::move(mediator), std::move(outcome), kind);
}

}  // namespace

Dataset simulate_two_arm(const Scenario& scenario, int n, double p_treat, std::uint64_t seed) {
  scenario.validate();
  if (n < 1) throw Error("InvalidArgument", "n must be at least 1");
  if (!(p_treat > 0.0 && p_treat < 1.0)) throw Error("InvalidArgument", "p_treat must lie in (0,1)");
  return assemble(
      scenario, n, ArmKind::TwoArm,
      [p_treat](const CounterStream& s) { return s.uniform(kSlotArm) < p_treat ? 1 : 0; }, seed);
}

Dataset simulate_three_arm(const Scenario& scenario, int n,
                           const std::array<double, 3>& arm_probs, std::uint64_t seed) {
  scenario.validate();
  if (n < 1) throw Error("InvalidArgument", "n must be at least 1");
  double total = 0.0;
  for (double p : arm_probs) {
    if (!(p >= 0.0)) throw Error("InvalidArgument", "negative arm probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw Error("InvalidArgument", "arm probabilities must sum to 1");

  return assemble(
      scenario, n, ArmKind::ThreeArm,
      [&arm_probs](const CounterStream& s) {
        const double u = s.uniform(kSlotArm);
        if (u < arm_probs[0]) return 0;
        if (u < arm_probs[0] + arm_probs[1]) return 1;
        return 2;
      },
      seed);
}

namespace {

bool exactly_enumerable(const Scenario& scenario) {
  if (!scenario.covariates.discrete()) return false;
  if (scenario.unobserved && !scenario.unobserved->discrete()) return false;
  if (scenario.mediator_is_table()) return true;
  return std::get<ShiftMediator>(scenario.mediator).noise.discrete();
}

// Mediator support with probabilities for one (context, arm) combination.
std::vector<std::pair<double, double>> mediator_support(const Scenario& scenario,
                                                        const UnitContext& ctx, int arm) {
  std::vector<std::pair<double, double>> support;
  if (const auto* shift = std::get_if<ShiftMediator>(&scenario.mediator)) {
    const double base =
        shift->c_coef.dot(ctx.c) + shift->ctilde_coef * ctx.ct + shift->shift[static_cast<std::size_t>(arm)];
    for (std::size_t v = 0; v < shift->noise.values.size(); ++v) {
      support.emplace_back(base + shift->noise.values[v], shift->noise.probs[v]);
    }
  } else {
    const auto& table = std::get<TableMediator>(scenario.mediator);
    const int row = mediator_table_row(scenario, arm, ctx.c_cell, ctx.ct_cell);
    for (std::size_t v = 0; v < table.values.size(); ++v) {
      support.emplace_back(table.values[v], table.rows[static_cast<std::size_t>(row)][v]);
    }
  }
  return support;
}

GroundTruth enumerate_truth(const Scenario& scenario) {
  const auto& cells = scenario.covariates.cells;
  const int n_c = std::max<int>(1, static_cast<int>(cells.size()));
  const int n_ct = scenario.n_ct_cells();

  double e_y0 = 0.0, e_y1 = 0.0, e_y1_i1 = 0.0;
  for (int ci = 0; ci < n_c; ++ci) {
    UnitContext ctx;
    ctx.c_cell = ci;
    const int k = scenario.covariates.dim();
    ctx.c.resize(k);
    for (int j = 0; j < k; ++j) ctx.c(j) = cells[static_cast<std::size_t>(ci)][static_cast<std::size_t>(j)];
    const double p_c = cells.empty() ? 1.0 : scenario.covariates.probs[static_cast<std::size_t>(ci)];

    for (int ti = 0; ti < n_ct; ++ti) {
      ctx.ct_cell = ti;
      double p_ct = 1.0;
      if (scenario.unobserved) {
        ctx.ct = scenario.unobserved->values[static_cast<std::size_t>(ti)];
        p_ct = scenario.unobserved->probs[static_cast<std::size_t>(ti)];
      }
      const double weight = p_c * p_ct;

      for (const auto& [m, pm] : mediator_support(scenario, ctx, 0)) {
        e_y0 += weight * pm * outcome_mean(scenario, ctx, 0, m);
        e_y1_i1 += weight * pm * outcome_mean(scenario, ctx, 1, m);
      }
      for (const auto& [m, pm] : mediator_support(scenario, ctx, 1)) {
        e_y1 += weight * pm * outcome_mean(scenario, ctx, 1, m);
      }
    }
  }

  GroundTruth truth;
  truth.e_y0 = e_y0;
  truth.e_y1 = e_y1;
  truth.e_y1_i1 = e_y1_i1;
  truth.direct = e_y1_i1 - e_y0;
  truth.indirect = e_y1 - e_y1_i1;
  truth.total = e_y1 - e_y0;
  truth.exact = true;
  return truth;
}

GroundTruth monte_carlo_truth(const Scenario& scenario, long long reps, std::uint64_t seed) {
  if (reps < 1) throw Error("InvalidArgument", "Monte Carlo truth needs reps >= 1");
  double sum0 = 0.0, sum1 = 0.0, sum_i1 = 0.0;
  double sq0 = 0.0, sq1 = 0.0, sq_i1 = 0.0;

  for (long long r = 0; r < reps; ++r) {
    const CounterStream stream(seed, static_cast<std::uint64_t>(r));
    const UnitContext ctx = draw_context(scenario, stream);
    const double u_m = stream.uniform(kSlotMediator);
    const double m0 = draw_mediator(scenario, ctx, 0, u_m);
    const double m1 = draw_mediator(scenario, ctx, 1, u_m);
    const double y0 = outcome_mean(scenario, ctx, 0, m0);
    const double y1 = outcome_mean(scenario, ctx, 1, m1);
    const double y1_i1 = outcome_mean(scenario, ctx, 1, m0);
    sum0 += y0;
    sum1 += y1;
    sum_i1 += y1_i1;
    sq0 += y0 * y0;
    sq1 += y1 * y1;
    sq_i1 += y1_i1 * y1_i1;
  }

  const double n = static_cast<double>(reps);
  auto standard_error = [n](double sum, double sq) {
    const double mean = sum / n;
    const double var = std::fmax(0.0, sq / n - mean * mean);
    return std::sqrt(var / n);
  };

  GroundTruth truth;
  truth.e_y0 = sum0 / n;
  truth.e_y1 = sum1 / n;
  truth.e_y1_i1 = sum_i1 / n;
  truth.direct = truth.e_y1_i1 - truth.e_y0;
  truth.indirect = truth.e_y1 - truth.e_y1_i1;
  truth.total = truth.e_y1 - truth.e_y0;
  truth.exact = false;
  truth.monte_carlo = MonteCarloInfo{
      reps, seed,
      std::fmax(standard_error(sum0, sq0),
                std::fmax(standard_error(sum1, sq1), standard_error(sum_i1, sq_i1)))};
  return truth;
}

}  // namespace

GroundTruth ground_truth(const Scenario& scenario, long long reps, std::uint64_t seed) {
  scenario.validate();
  if (exactly_enumerable(scenario)) return enumerate_truth(scenario);
  return monte_carlo_truth(scenario, reps, seed);
}

Scenario birthweight_scenario() {
  Scenario scenario;
  scenario.covariates.kind = CovariateLaw::Kind::Discrete;
  scenario.covariates.cells = {{}};
  scenario.covariates.probs = {1.0};

  ScalarLaw defect;
  defect.kind = ScalarLaw::Kind::Discrete;
  defect.values = {0.0, 1.0};
  defect.probs = {0.85, 0.15};
  scenario.unobserved = defect;

  // P(low birth weight | defect, smoking): smoking raises it, defects
  // dominate it.
  TableMediator table;
  table.values = {0.0, 1.0};
  table.rows = {
      {0.92, 0.08},  // arm 0, no defect
      {0.20, 0.80},  // arm 0, defect
      {0.75, 0.25},  // arm 1, no defect
      {0.12, 0.88},  // arm 1, defect
  };
  scenario.mediator = std::move(table);

  // Mortality: strongly defect-driven, mildly weight-driven, smoking adds
  // direct harm (+0.3 on the logit scale).
  scenario.outcome.link = Link::Logit;
  scenario.outcome.arms[0] = OutcomeArm{-4.5, 0.4, Eigen::VectorXd(0), 3.8};
  scenario.outcome.arms[1] = OutcomeArm{-4.2, 0.4, Eigen::VectorXd(0), 3.8};

  scenario.mechanism = InterventionMechanism::IndependentRedraw;
  scenario.validate();
  return scenario;
}

}  // namespace organic
