// Command-line driver: trace generation, training, simulation, reporting
// and offline analysis.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pec/analysis.hpp"
#include "pec/pipeline.hpp"

namespace {

using namespace pec;
namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config, "JSON config file");
  cmd->add_option("--set", opts.overrides, "Override a config key, e.g. --set tsas.epochs=2")->take_all();
}

RunConfig resolve(const CommonOptions& opts) { return load_config(opts.config, opts.overrides); }

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

int cmd_gen_trace(const CommonOptions& opts, const std::string& out_path) {
  const RunConfig cfg = resolve(opts);
  const Trace trace = generate_synthetic_trace(cfg.synthetic);
  const fs::path path = out_path.empty() ? fs::path(cfg.output_dir) / "trace.csv" : fs::path(out_path);
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  write_trace(trace, path);
  write_sidecar(path, cfg, {{"requests", trace.requests.size()}});
  std::printf("wrote %zu requests to %s\n", trace.requests.size(), path.c_str());
  return 0;
}

int cmd_train(const CommonOptions& opts) {
  const RunConfig cfg = resolve(opts);
  const Dataset data = load_dataset(cfg);
  std::printf("train %zu requests, test %zu requests, boundary %.1f s\n", data.train.requests.size(),
              data.test.requests.size(), data.boundary);
  const auto models = train_models(data, cfg, [](int epoch, double loss) {
    std::printf("tsas epoch %d loss %.6f\n", epoch, loss);
    std::fflush(stdout);
  });
  std::printf("active users %zu, active contents %zu\n", models.active.user_count(), models.active.content_count());
  save_models(models, data, cfg, cfg.checkpoint_dir);
  std::printf("checkpoints written to %s\n", cfg.checkpoint_dir.c_str());
  return 0;
}

int cmd_simulate(const CommonOptions& opts, bool events) {
  const RunConfig cfg = resolve(opts);
  const Dataset data = load_dataset(cfg);
  SimConfig sim = cfg.sim_config();
  sim.start = data.boundary;
  sim.snapshot_period = 0.0;
  sim.record_cache_log = events;

  std::optional<TrainedModels> models;
  std::optional<Predictor> predictor;
  SimModels sm;
  if (uses_predictions(sim.policy)) {
    models = load_models(data, cfg, cfg.checkpoint_dir);
    const auto mode = sim.policy == Policy::NaivePec ? PredictorMode::NGramOnly : PredictorMode::Fused;
    predictor.emplace(data.full, models->ngram, &models->tsas, mode, cfg.topn);
    sm = {&*predictor, &models->stats, &models->active};
  }
  const auto t0 = std::chrono::steady_clock::now();
  const SimReport report = run_simulation(data.train, data.test, sm, sim);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = cfg.output_dir;
  const std::string stem = cfg.policy;
  nlohmann::json j{{"report", report_to_json(report)}, {"config", config_to_json(cfg)}, {"seed", cfg.seed}};
  write_json(dir / (stem + ".json"), j);
  {
    std::ofstream out(dir / (stem + "_hit_ratio.csv"));
    write_hit_ratio_csv(report, out);
  }
  write_sidecar(dir / (stem + "_hit_ratio.csv"), cfg);
  if (events) {
    {
      std::ofstream out(dir / (stem + "_events.csv"));
      write_event_log_csv(report, data.full, out);
    }
    write_sidecar(dir / (stem + "_events.csv"), cfg);
    {
      std::ofstream out(dir / (stem + "_cache_log.csv"));
      write_cache_log_csv(report.cache_log, data.full, out);
    }
    write_sidecar(dir / (stem + "_cache_log.csv"), cfg);
  }
  std::printf("%s: hit ratio %.4f, latency reduction %.4f, prefetches %zu, %.1f s\n", stem.c_str(), report.hit_ratio,
              report.latency_reduction, report.prefetch_count, wall);
  return 0;
}

int cmd_report(const CommonOptions& opts, std::vector<std::string> runs, const std::string& out_path) {
  const RunConfig cfg = resolve(opts);
  if (runs.empty()) {
    if (fs::exists(cfg.output_dir))
      for (const auto& e : fs::directory_iterator(cfg.output_dir))
        if (e.path().extension() == ".json" && e.path().string().find(".meta.json") == std::string::npos)
          runs.push_back(e.path().string());
    std::sort(runs.begin(), runs.end());
  }
  const fs::path path = out_path.empty() ? fs::path(cfg.output_dir) / "comparison.csv" : fs::path(out_path);
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  out << "run,policy,capacity,K,requests,hit_ratio,latency_reduction,total_latency,cacheless_latency,prefetch_count,"
         "demand_count,utilization_demand,utilization_prefetch\n";
  std::size_t rows = 0;
  for (const auto& run : runs) {
    std::ifstream in(run);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("report")) continue;
    const auto& r = j.at("report");
    const auto& c = j.at("config");
    out << fs::path(run).stem().string() << ',' << r.at("policy").get<std::string>() << ',' << c.at("capacity") << ','
        << c.at("K") << ',' << r.at("requests") << ',' << r.at("hit_ratio") << ',' << r.at("latency_reduction") << ','
        << r.at("total_latency") << ',' << r.at("cacheless_latency") << ',' << r.at("prefetch_count") << ','
        << r.at("demand_count") << ',' << r.at("utilization_demand") << ',' << r.at("utilization_prefetch") << '\n';
    ++rows;
  }
  out.close();
  write_sidecar(path, cfg, {{"runs", runs}});
  std::printf("compared %zu runs into %s\n", rows, path.c_str());
  return 0;
}

int cmd_analyze(const CommonOptions& opts, std::size_t max_samples) {
  const RunConfig cfg = resolve(opts);
  const Dataset data = load_dataset(cfg);
  const TrainedModels models = load_models(data, cfg, cfg.checkpoint_dir);
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);

  Predictor predictor(data.full, models.ngram, &models.tsas, PredictorMode::Fused, cfg.topn);
  const auto eval = evaluate_fusion(predictor, data.train, data.test, models.active, {1, 3, 10}, max_samples);
  {
    std::ofstream out(dir / "fusion_hits.csv");
    write_fusion_csv(eval, out);
  }
  write_sidecar(dir / "fusion_hits.csv", cfg, {{"containment_failures", eval.containment_failures}});

  SimConfig sim = cfg.sim_config();
  sim.policy = Policy::Pec;
  sim.start = data.boundary;
  SimModels sm{&predictor, &models.stats, &models.active};
  const SimReport report = run_simulation(data.train, data.test, sm, sim);
  const auto ranks = popularity_ranks(data.full);
  const auto bands = default_popularity_bands();
  const auto recall = recall_by_popularity(data.test, report.snapshots, ranks, bands, sim.snapshot_period);
  {
    std::ofstream out(dir / "recall_by_popularity.csv");
    write_recall_csv(recall, out);
  }
  write_sidecar(dir / "recall_by_popularity.csv", cfg, {{"snapshots", report.snapshots.size()}});
  std::printf("fusion samples %zu; recall snapshots %zu; written to %s\n", eval.samples, report.snapshots.size(),
              dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive edge caching simulator"};
  app.require_subcommand(1);

  CommonOptions gen_opts, train_opts, sim_opts, report_opts, analyze_opts;
  std::string gen_out, report_out;
  std::vector<std::string> report_runs;
  bool events = false;
  std::size_t max_samples = 0;

  auto* gen = app.add_subcommand("gen-trace", "Write a synthetic trace CSV");
  add_common(gen, gen_opts);
  gen->add_option("-o,--out", gen_out, "Output CSV (default <output_dir>/trace.csv)");

  auto* train = app.add_subcommand("train", "Fit the n-gram, TSAS and watch-time models");
  add_common(train, train_opts);

  auto* simulate = app.add_subcommand("simulate", "Replay the test split under one policy");
  add_common(simulate, sim_opts);
  simulate->add_flag("--events", events, "Also write the event and cache logs");

  auto* report = app.add_subcommand("report", "Join simulation summaries into one CSV");
  add_common(report, report_opts);
  report->add_option("runs", report_runs, "Summary JSON files (default: every run in output_dir)");
  report->add_option("-o,--out", report_out, "Output CSV (default <output_dir>/comparison.csv)");

  auto* analyze = app.add_subcommand("analyze", "Fusion hit rates and recall by popularity band");
  add_common(analyze, analyze_opts);
  analyze->add_option("--max-samples", max_samples, "Cap on fusion evaluation samples (0 = all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_trace(gen_opts, gen_out);
    if (*train) return cmd_train(train_opts);
    if (*simulate) return cmd_simulate(sim_opts, events);
    if (*report) return cmd_report(report_opts, report_runs, report_out);
    if (*analyze) return cmd_analyze(analyze_opts, max_samples);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
