#pragma once

#include <json.hpp>
#include <string>

#include "organic/diagnostics.hpp"
#include "organic/estimate.hpp"
#include "organic/inference.hpp"
#include "organic/simulate.hpp"

namespace organic {

std::string method_name(EstimationMethod method);
EstimationMethod method_from_name(const std::string& name);

nlohmann::json estimate_report(const EffectEstimate& estimate, const EstimatorConfig& config);

/// Estimate report with merged se_* / ci_*_lower / ci_*_upper fields.
nlohmann::json estimate_report(const BootstrapResult& result, const EstimatorConfig& config);

nlohmann::json check_report_json(const CheckReport& report);

nlohmann::json ground_truth_json(const GroundTruth& truth);

}  // namespace organic
