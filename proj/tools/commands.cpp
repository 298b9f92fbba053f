#include "commands.hpp"

#include <pthread.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "refinder/aggregation.hpp"
#include "refinder/config.hpp"
#include "refinder/errors.hpp"
#include "refinder/evaluation/benchmark.hpp"
#include "refinder/evaluation/synthetic.hpp"
#include "refinder/io/containers.hpp"
#include "refinder/io/metadata.hpp"
#include "refinder/service/http.hpp"

namespace refinder::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const fs::path& path) {
    try {
        return json::parse(read_file_bytes(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + " is not valid JSON: " + e.what());
    }
}

void check_top_keys(const json& j, const char* what, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError("unknown key \"" + key + "\" in " + what);
    }
}

PoolingMethod pooling_method(const std::string& name) {
    if (name == "avg") return PoolingMethod::average;
    if (name == "max") return PoolingMethod::max;
    if (name == "pmp") return PoolingMethod::pmp;
    if (name == "gem") return PoolingMethod::gem;
    if (name == "adacow") return PoolingMethod::adacow;
    if (name == "rmac") return PoolingMethod::rmac;
    throw ParameterError("unknown pooling method '" + name + "'");
}

void write_text(const std::string& target, const std::string& text) {
    if (target == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    write_file_bytes(target, text);
}

std::vector<BenchmarkQuery> resolve_queries(const json& spec, const CorpusIndex& index) {
    std::vector<BenchmarkQuery> out;
    if (spec.is_array()) {
        for (const auto& q : spec) out.push_back({q.at("image_id").get<std::string>(), q.at("label").get<std::string>()});
        return out;
    }
    // {"label": L, "count": n}: n items carrying L, evenly spaced in id order.
    check_top_keys(spec, "\"queries\"", {"label", "count"});
    const std::string label = spec.at("label").get<std::string>();
    const std::size_t count = spec.value("count", std::size_t{20});
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < index.size(); ++i)
        if (index.has_label(i, label)) ids.push_back(index.id(i));
    std::sort(ids.begin(), ids.end());
    if (ids.size() < 2) throw ValidationError("label '" + label + "' has fewer than two items");
    const std::size_t n = std::min(count, ids.size());
    for (std::size_t i = 0; i < n; ++i) out.push_back({ids[i * ids.size() / n], label});
    return out;
}

}  // namespace

int run_ingest(const IngestArgs& args) {
    const DatasetManifest manifest = read_manifest(args.manifest);
    DatasetRegistry registry;
    const auto ds = registry.ingest(manifest);
    std::size_t labelled = 0;
    for (std::size_t i = 0; i < ds->index.size(); ++i) labelled += ds->index.labels(i).empty() ? 0 : 1;
    const json out = {{"handle", ds->handle},
                      {"name", ds->name},
                      {"count", ds->index.size()},
                      {"dim", ds->index.dim()},
                      {"labelled", labelled},
                      {"background", ds->background ? json("ok") : json(ds->background_error)}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

int run_pool(const PoolArgs& args) {
    const std::vector<FeatureMap> maps = read_feature_maps(args.input);
    if (maps.empty()) throw IngestError(args.input + " holds no feature maps");
    if (maps.size() % args.merge_scales != 0)
        throw ParameterError(std::to_string(maps.size()) + " maps do not split into groups of " +
                             std::to_string(args.merge_scales));
    PoolingOptions opts;
    opts.method = pooling_method(args.method);
    opts.pmp_ratio = args.pmp_ratio;
    opts.gem_p = args.gem_p;
    opts.rmac_scales = args.rmac_scales;

    DescriptorBlock block;
    block.count = maps.size() / args.merge_scales;
    std::vector<Descriptor> group;
    for (std::size_t i = 0; i < maps.size(); i += args.merge_scales) {
        group.clear();
        for (std::size_t s = 0; s < args.merge_scales; ++s) group.push_back(pool(maps[i + s], opts));
        const Descriptor d = args.merge_scales == 1 ? group.front() : multiscale_merge(group);
        if (block.dim == 0) block.dim = d.dim();
        if (d.dim() != block.dim) throw DimensionError("feature maps differ in channel count");
        block.values.insert(block.values.end(), d.values().begin(), d.values().end());
    }
    write_descriptors(args.output, block);
    std::fprintf(stderr, "wrote %zu descriptors of dim %zu to %s\n", block.count, block.dim, args.output.c_str());
    return 0;
}

int run_serve(const ServeArgs& args) {
    json config = json::object();
    fs::path base;
    if (!args.config.empty()) {
        config = load_json(args.config);
        base = fs::path(args.config).parent_path();
        check_top_keys(config, "service config", {"datasets", "snapshot_dir", "default_method", "feedback", "history_depth"});
    }
    auto rel = [&](const std::string& p) { return fs::path(p).is_relative() && !base.empty() ? base / p : fs::path(p); };

    SessionOptions opts;
    opts.params = feedback_params_from_json(config.value("feedback", json()));
    opts.default_method = parse_method(args.method.value_or(config.value("default_method", std::string("itml"))));
    opts.history_depth = config.value("history_depth", opts.history_depth);
    if (args.snapshot_dir) opts.snapshot_dir = *args.snapshot_dir;
    else if (config.contains("snapshot_dir")) opts.snapshot_dir = rel(config["snapshot_dir"].get<std::string>());

    DatasetRegistry registry(opts.params.elda_shrinkage_scale);
    std::vector<fs::path> manifests;
    for (const auto& m : config.value("datasets", std::vector<std::string>())) manifests.push_back(rel(m));
    for (const auto& m : args.manifests) manifests.emplace_back(m);
    for (const auto& m : manifests) {
        const auto ds = registry.ingest(read_manifest(m));
        std::fprintf(stderr, "dataset %s: %zu items, dim %zu\n", ds->handle.c_str(), ds->index.size(), ds->index.dim());
    }

    SessionManager sessions(registry, opts);
    if (const std::size_t n = sessions.restore_all()) std::fprintf(stderr, "restored %zu sessions\n", n);

    const char* env = std::getenv("REFINDER_LISTEN");
    const auto [host, port] = parse_listen_address(env ? env : "127.0.0.1:8080");
    HttpServer server(registry, sessions);

    // Route SIGINT/SIGTERM to a watcher thread that shuts the server down.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    const int bound = server.bind(host, port);
    std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), bound);
    std::thread watcher([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.listen();
    if (watcher.joinable()) {
        pthread_kill(watcher.native_handle(), SIGTERM);
        watcher.join();
    }
    return 0;
}

int run_simulate(const SimulateArgs& args) {
    const json config = load_json(args.config);
    check_top_keys(config, "simulation config", {"dataset", "queries", "methods", "simulation", "feedback", "threads"});
    const fs::path base = fs::path(args.config).parent_path();
    fs::path manifest_path = config.at("dataset").get<std::string>();
    if (manifest_path.is_relative()) manifest_path = base / manifest_path;
    const CorpusIndex index = build_index(load_entries(read_manifest(manifest_path)));

    SimulationConfig sim = simulation_config_from_json(config.value("simulation", json()));
    if (args.seed) sim.rng_seed = *args.seed;
    if (args.repetitions) sim.repetitions = *args.repetitions;
    if (args.rounds) sim.rounds = *args.rounds;
    sim.validate();
    const FeedbackParams params = feedback_params_from_json(config.value("feedback", json()));

    std::vector<std::string> names = args.methods;
    if (names.empty()) names = config.value("methods", std::vector<std::string>());
    if (names.empty())
        for (Method m : all_methods()) names.emplace_back(method_name(m));
    std::vector<MethodSpec> methods;
    for (const auto& n : names) methods.push_back(builtin_method(parse_method(n), params));

    if (!config.contains("queries")) throw ValidationError("simulation config needs \"queries\"");
    const auto queries = resolve_queries(config["queries"], index);
    const std::size_t threads = args.threads.value_or(config.value("threads", std::size_t{1}));

    const BenchmarkReport report = run_benchmark(index, queries, methods, sim, threads);
    if (args.json) write_text(*args.json, report.to_json().dump(2) + "\n");
    if (args.csv || !args.json) write_text(args.csv.value_or("-"), report.to_csv());
    for (std::size_t m = 0; m < report.methods.size(); ++m)
        if (report.failed_rounds[m] > 0)
            std::fprintf(stderr, "%s: %zu failed refits (previous ranking kept)\n", report.methods[m].c_str(),
                         report.failed_rounds[m]);
    return 0;
}

int run_ttest(const TTestArgs& args) {
    const BenchmarkReport a = BenchmarkReport::from_json(load_json(args.a));
    const BenchmarkReport b = BenchmarkReport::from_json(load_json(args.b));

    std::vector<std::pair<std::string, std::string>> pairs;
    if (args.method_a || args.method_b) {
        const std::string ma = args.method_a.value_or(args.method_b.value_or(""));
        const std::string mb = args.method_b.value_or(ma);
        pairs.emplace_back(ma, mb);
    } else if (a.methods.size() == 1 && b.methods.size() == 1) {
        pairs.emplace_back(a.methods.front(), b.methods.front());
    } else {
        for (const auto& m : a.methods)
            if (std::find(b.methods.begin(), b.methods.end(), m) != b.methods.end()) pairs.emplace_back(m, m);
    }
    if (pairs.empty()) throw ValidationError("the reports share no method; pass --method-a/--method-b");

    std::printf("method_a,method_b,round,mean_a,mean_b,t,p,significant\n");
    for (const auto& [ma, mb] : pairs) {
        const std::size_t rounds = std::min(a.config.rounds, b.config.rounds) + 1;
        for (std::size_t r = 0; r < rounds; ++r) {
            const RoundStats& sa = a.at(ma, r);
            const RoundStats& sb = b.at(mb, r);
            if (sa.samples.size() != sb.samples.size())
                throw ValidationError("reports hold different numbers of sessions; they are not paired");
            const TTestResult t = paired_t_test(sa.samples, sb.samples);
            std::printf("%s,%s,%zu,%.6f,%.6f,%.6f,%.6g,%s\n", ma.c_str(), mb.c_str(), r, sa.mean, sb.mean, t.t, t.p,
                        t.p < 0.05 ? "yes" : "no");
        }
    }
    return 0;
}

int run_synth(const SynthArgs& args) {
    SyntheticConfig cfg;
    cfg.count = args.count;
    cfg.dim = args.dim;
    cfg.seed = args.seed;
    if (cfg.signal_dims > cfg.dim) cfg.signal_dims = cfg.dim;
    const SyntheticCorpus corpus = make_synthetic_corpus(cfg);

    const fs::path dir = args.output_dir;
    fs::create_directories(dir);
    DescriptorBlock block;
    block.count = corpus.entries.size();
    block.dim = cfg.dim;
    std::vector<MetadataRecord> records;
    for (const auto& e : corpus.entries) {
        block.values.insert(block.values.end(), e.values.begin(), e.values.end());
        records.push_back({e.image_id, e.image_uri, e.labels});
    }
    write_descriptors(dir / (args.name + ".desc"), block);
    write_metadata(dir / (args.name + ".jsonl"), records);
    DatasetManifest manifest{args.name, args.name + ".desc", args.name + ".jsonl", cfg.dim, block.count};
    write_file_bytes(dir / (args.name + ".manifest.json"), manifest.to_json().dump(2) + "\n");
    std::fprintf(stderr, "wrote %zu items (%zu relevant, label '%s') to %s\n", block.count, corpus.relevant_ids.size(),
                 corpus.label.c_str(), dir.string().c_str());
    return 0;
}

}  // namespace refinder::cli
