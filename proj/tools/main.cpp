#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "refinder/errors.hpp"

using namespace refinder::cli;

int main(int argc, char** argv) {
    CLI::App app{"refinder: image retrieval with relevance feedback"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate a dataset manifest and print its summary");
    c_ingest->add_option("manifest", ingest.manifest, "Manifest JSON file")->required()->check(CLI::ExistingFile);

    PoolArgs pool;
    auto* c_pool = app.add_subcommand("pool", "Aggregate a feature-map container into a descriptor container");
    c_pool->add_option("-i,--input", pool.input, "FMAP0001 input")->required()->check(CLI::ExistingFile);
    c_pool->add_option("-o,--output", pool.output, "DESC0001 output")->required();
    c_pool->add_option("-m,--method", pool.method, "avg | max | pmp | gem | adacow | rmac")
        ->check(CLI::IsMember({"avg", "max", "pmp", "gem", "adacow", "rmac"}))
        ->capture_default_str();
    c_pool->add_option("--pmp-ratio", pool.pmp_ratio, "Fraction of positions averaged by PMP")->capture_default_str();
    c_pool->add_option("--gem-p", pool.gem_p, "GeM exponent")->capture_default_str();
    c_pool->add_option("--rmac-scales", pool.rmac_scales, "R-MAC scales")->capture_default_str();
    c_pool->add_option("--merge-scales", pool.merge_scales,
                       "Average every N consecutive descriptors (scaled versions of one image)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    ServeArgs serve;
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP service (listen address from REFINDER_LISTEN)");
    c_serve->add_option("-c,--config", serve.config, "Service config JSON")->check(CLI::ExistingFile);
    c_serve->add_option("-d,--dataset", serve.manifests, "Manifest to ingest at startup (repeatable)");
    c_serve->add_option("--snapshot-dir", serve.snapshot_dir, "Session snapshot directory");
    c_serve->add_option("--method", serve.method, "Default feedback method");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Run the feedback benchmark described by a config file");
    c_sim->add_option("config", sim.config, "Simulation config JSON")->required()->check(CLI::ExistingFile);
    c_sim->add_option("--csv", sim.csv, "Write the CSV table here ('-' for stdout)");
    c_sim->add_option("--json", sim.json, "Write the JSON report here");
    c_sim->add_option("-j,--threads", sim.threads, "Worker threads");
    c_sim->add_option("--seed", sim.seed, "Override rng_seed");
    c_sim->add_option("--repetitions", sim.repetitions, "Override repetitions");
    c_sim->add_option("--rounds", sim.rounds, "Override rounds");
    c_sim->add_option("--methods", sim.methods, "Override the method list");

    TTestArgs tt;
    auto* c_tt = app.add_subcommand("ttest", "Paired t-tests between two JSON benchmark reports");
    c_tt->add_option("a", tt.a, "First report")->required()->check(CLI::ExistingFile);
    c_tt->add_option("b", tt.b, "Second report")->required()->check(CLI::ExistingFile);
    c_tt->add_option("--method-a", tt.method_a, "Method taken from the first report");
    c_tt->add_option("--method-b", tt.method_b, "Method taken from the second report");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Write a seeded synthetic dataset (descriptors, metadata, manifest)");
    c_synth->add_option("output_dir", synth.output_dir, "Destination directory")->required();
    c_synth->add_option("--name", synth.name)->capture_default_str();
    c_synth->add_option("--count", synth.count)->capture_default_str();
    c_synth->add_option("--dim", synth.dim)->capture_default_str();
    c_synth->add_option("--seed", synth.seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_ingest->parsed()) return run_ingest(ingest);
        if (c_pool->parsed()) return run_pool(pool);
        if (c_serve->parsed()) return run_serve(serve);
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_tt->parsed()) return run_ttest(tt);
        if (c_synth->parsed()) return run_synth(synth);
    } catch (const refinder::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fatal: %s\n", e.what());
        return 3;
    }
    return 1;
}
