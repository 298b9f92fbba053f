#include "refinder/config.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

#include "refinder/errors.hpp"

namespace refinder {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* block, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ValidationError(std::string("\"") + block + "\" must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError("unknown key \"" + key + "\" in \"" + block + "\"");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("config key \"") + key + "\" has the wrong type");
    }
}

void read_real(const json& j, const char* key, double& out) {
    if (j.contains(key) && j.at(key).is_string()) {
        const auto s = j.at(key).get<std::string>();
        if (s != "inf") throw ValidationError(std::string("config key \"") + key + "\" must be a number or \"inf\"");
        out = std::numeric_limits<double>::infinity();
        return;
    }
    read(j, key, out);
}

json real(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

FeedbackParams feedback_params_from_json(const json& j) {
    FeedbackParams p;
    if (j.is_null()) return p;
    check_keys(j, "feedback", {"diagonal", "itml", "svm", "elda_shrinkage_scale"});
    if (j.contains("diagonal")) {
        const json& d = j["diagonal"];
        check_keys(d, "diagonal", {"step", "iterations"});
        read(d, "step", p.diagonal.step);
        read(d, "iterations", p.diagonal.iterations);
    }
    if (j.contains("itml")) {
        const json& d = j["itml"];
        check_keys(d, "itml", {"gamma", "max_sweeps", "tolerance", "upper_fraction", "lower_percentile"});
        read_real(d, "gamma", p.itml.gamma);
        read(d, "max_sweeps", p.itml.max_sweeps);
        read(d, "tolerance", p.itml.tolerance);
        read(d, "upper_fraction", p.itml.upper_fraction);
        read(d, "lower_percentile", p.itml.lower_percentile);
    }
    if (j.contains("svm")) {
        const json& d = j["svm"];
        check_keys(d, "svm", {"c", "nu", "max_iterations", "tolerance"});
        read(d, "c", p.svm.c);
        read(d, "nu", p.svm.nu);
        read(d, "max_iterations", p.svm.max_iterations);
        read(d, "tolerance", p.svm.tolerance);
    }
    read(j, "elda_shrinkage_scale", p.elda_shrinkage_scale);
    return p;
}

json feedback_params_to_json(const FeedbackParams& p) {
    return {{"diagonal", {{"step", p.diagonal.step}, {"iterations", p.diagonal.iterations}}},
            {"itml",
             {{"gamma", real(p.itml.gamma)},
              {"max_sweeps", p.itml.max_sweeps},
              {"tolerance", p.itml.tolerance},
              {"upper_fraction", p.itml.upper_fraction},
              {"lower_percentile", p.itml.lower_percentile}}},
            {"svm",
             {{"c", p.svm.c},
              {"nu", p.svm.nu},
              {"max_iterations", p.svm.max_iterations},
              {"tolerance", p.svm.tolerance}}},
            {"elda_shrinkage_scale", p.elda_shrinkage_scale}};
}

SimulationConfig simulation_config_from_json(const json& j) {
    SimulationConfig c;
    if (j.is_null()) return c;
    check_keys(j, "simulation",
               {"rounds", "marks_per_round", "pool_depth", "eval_k", "repetitions", "subsample_fraction", "rng_seed"});
    read(j, "rounds", c.rounds);
    read(j, "marks_per_round", c.marks_per_round);
    read(j, "pool_depth", c.pool_depth);
    read(j, "eval_k", c.eval_k);
    read(j, "repetitions", c.repetitions);
    read(j, "subsample_fraction", c.subsample_fraction);
    read(j, "rng_seed", c.rng_seed);
    c.validate();
    return c;
}

json simulation_config_to_json(const SimulationConfig& c) {
    return {{"rounds", c.rounds},
            {"marks_per_round", c.marks_per_round},
            {"pool_depth", c.pool_depth},
            {"eval_k", c.eval_k},
            {"repetitions", c.repetitions},
            {"subsample_fraction", c.subsample_fraction},
            {"rng_seed", c.rng_seed}};
}

}  // namespace refinder
