#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace refinder::cli {

struct IngestArgs {
    std::string manifest;
};

struct PoolArgs {
    std::string input;
    std::string output;
    std::string method = "pmp";
    double pmp_ratio = 0.1;
    double gem_p = 2.0;
    std::size_t rmac_scales = 3;
    std::size_t merge_scales = 1;  // consecutive maps that are scales of one image
};

struct ServeArgs {
    std::string config;
    std::vector<std::string> manifests;
    std::optional<std::string> snapshot_dir;
    std::optional<std::string> method;
};

struct SimulateArgs {
    std::string config;
    std::optional<std::string> csv;
    std::optional<std::string> json;
    std::optional<std::size_t> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> repetitions;
    std::optional<std::size_t> rounds;
    std::vector<std::string> methods;
};

struct TTestArgs {
    std::string a;
    std::string b;
    std::optional<std::string> method_a;
    std::optional<std::string> method_b;
};

struct SynthArgs {
    std::string output_dir;
    std::string name = "synthetic";
    std::size_t count = 5000;
    std::size_t dim = 64;
    std::uint64_t seed = 7;
};

int run_ingest(const IngestArgs& args);
int run_pool(const PoolArgs& args);
int run_serve(const ServeArgs& args);
int run_simulate(const SimulateArgs& args);
int run_ttest(const TTestArgs& args);
int run_synth(const SynthArgs& args);

}  // namespace refinder::cli
