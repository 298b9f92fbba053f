#pragma once

#include <nlohmann/json.hpp>

#include "refinder/evaluation/simulation.hpp"
#include "refinder/feedback/refine.hpp"

namespace refinder {

// JSON configuration blocks shared by the CLI and the service. Missing keys
// keep their defaults; unknown keys raise ValidationError so typos surface.
//
//   feedback:   {"diagonal": {"step", "iterations"},
//                "itml": {"gamma" (number or "inf"), "max_sweeps", "tolerance",
//                         "upper_fraction", "lower_percentile"},
//                "svm": {"c", "nu", "max_iterations", "tolerance"},
//                "elda_shrinkage_scale"}
//   simulation: {"rounds", "marks_per_round", "pool_depth", "eval_k",
//                "repetitions", "subsample_fraction", "rng_seed"}

FeedbackParams feedback_params_from_json(const nlohmann::json& j);
nlohmann::json feedback_params_to_json(const FeedbackParams& p);

SimulationConfig simulation_config_from_json(const nlohmann::json& j);
nlohmann::json simulation_config_to_json(const SimulationConfig& c);

}  // namespace refinder
