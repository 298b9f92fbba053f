#include <gtest/gtest.h>

#include <cmath>

#include "refinder/config.hpp"
#include "refinder/errors.hpp"

using namespace refinder;
using nlohmann::json;

TEST(FeedbackConfig, EmptyObjectKeepsDefaults) {
    const FeedbackParams p = feedback_params_from_json(json::object());
    const FeedbackParams d;
    EXPECT_EQ(p.diagonal.step, d.diagonal.step);
    EXPECT_EQ(p.itml.max_sweeps, d.itml.max_sweeps);
    EXPECT_TRUE(std::isinf(p.itml.gamma));
    EXPECT_EQ(p.svm.c, d.svm.c);
}

TEST(FeedbackConfig, ReadsNestedValues) {
    const FeedbackParams p = feedback_params_from_json(json::parse(R"({
        "diagonal": {"step": 0.02, "iterations": 10},
        "itml": {"gamma": 1.0, "lower_percentile": 90},
        "svm": {"c": 4, "nu": 0.3},
        "elda_shrinkage_scale": 0.5})"));
    EXPECT_EQ(p.diagonal.step, 0.02);
    EXPECT_EQ(p.diagonal.iterations, 10u);
    EXPECT_EQ(p.itml.gamma, 1.0);
    EXPECT_EQ(p.itml.lower_percentile, 90.0);
    EXPECT_EQ(p.svm.c, 4.0);
    EXPECT_EQ(p.svm.nu, 0.3);
    EXPECT_EQ(p.elda_shrinkage_scale, 0.5);
}

TEST(FeedbackConfig, InfinityIsWrittenAsString) {
    const json j = feedback_params_to_json({});
    EXPECT_EQ(j["itml"]["gamma"], "inf");
    const FeedbackParams back = feedback_params_from_json(j);
    EXPECT_TRUE(std::isinf(back.itml.gamma));
    EXPECT_EQ(feedback_params_to_json(back), j);
}

TEST(FeedbackConfig, RejectsUnknownKeysAndWrongTypes) {
    EXPECT_THROW(feedback_params_from_json(json::parse(R"({"itlm": {}})")), ValidationError);
    EXPECT_THROW(feedback_params_from_json(json::parse(R"({"svm": {"C": 1}})")), ValidationError);
    EXPECT_THROW(feedback_params_from_json(json::parse(R"({"svm": {"c": "big"}})")), ValidationError);
    EXPECT_THROW(feedback_params_from_json(json::parse(R"({"itml": {"gamma": "huge"}})")), ValidationError);
    EXPECT_THROW(feedback_params_from_json(json::array()), ValidationError);
}

TEST(SimulationConfigJson, RoundTripAndValidation) {
    SimulationConfig c;
    c.rounds = 4;
    c.rng_seed = 99;
    c.subsample_fraction = 0.5;
    const SimulationConfig back = simulation_config_from_json(simulation_config_to_json(c));
    EXPECT_EQ(back.rounds, 4u);
    EXPECT_EQ(back.rng_seed, 99u);
    EXPECT_EQ(back.subsample_fraction, 0.5);
    EXPECT_EQ(back.pool_depth, c.pool_depth);
    EXPECT_THROW(simulation_config_from_json(json::parse(R"({"marks_per_round": 200})")), ParameterError);
    EXPECT_THROW(simulation_config_from_json(json::parse(R"({"round": 3})")), ValidationError);
}
