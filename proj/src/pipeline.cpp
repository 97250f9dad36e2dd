#include "pec/pipeline.hpp"

#include <algorithm>
#include <fstream>

namespace pec {

Dataset split_dataset(Trace full, Seconds test_span) {
  Dataset d;
  const Seconds last = full.requests.empty() ? 0.0 : full.requests.back().timestamp;
  d.boundary = std::max(0.0, last - test_span);
  auto [train, test] = split_at(full, d.boundary);
  d.train = std::move(train);
  d.test = std::move(test);
  d.full = std::move(full);
  return d;
}

Dataset load_dataset(const RunConfig& cfg) {
  Trace full = cfg.trace.empty() ? generate_synthetic_trace(cfg.synthetic) : parse_trace(cfg.trace);
  return split_dataset(std::move(full), cfg.test_span_s);
}

TrainedModels train_models(const Dataset& data, const RunConfig& cfg, const EpochCallback& on_epoch) {
  TrainedModels m;
  m.active = filter_active(data.train, cfg.min_active_count);
  m.ngram = build_ngram(data.train, cfg.ngram_n, &m.active);
  TsasConfig tc = cfg.tsas;
  tc.seed = cfg.seed;
  m.tsas = TsasModel(tc, active_vocabulary(m.active));
  const auto sequences = make_training_sequences(data.train, m.active, m.tsas);
  train_tsas(m.tsas, sequences, tc.epochs, on_epoch);
  m.stats = fit_watch_stats(data.train, cfg.watch_caps, 60.0, cfg.default_sigma_s);
  return m;
}

void write_sidecar(const std::filesystem::path& path, const RunConfig& cfg, const nlohmann::json& extra) {
  nlohmann::json meta{{"artifact", path.filename().string()}, {"config", config_to_json(cfg)}, {"seed", cfg.seed}};
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) meta[k] = v;
  auto meta_path = path;
  meta_path += ".meta.json";
  std::ofstream out(meta_path);
  out << meta.dump(2) << '\n';
}

void save_models(const TrainedModels& m, const Dataset& data, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "ngram.csv");
    write_ngram_csv(m.ngram, data.full, out);
  }
  write_sidecar(dir / "ngram.csv", cfg);
  {
    std::ofstream out(dir / "watch_stats.csv");
    write_watch_stats_csv(m.stats, data.full, out);
  }
  write_sidecar(dir / "watch_stats.csv", cfg);
  save_tsas(m.tsas, data.full, dir / "tsas");

  nlohmann::json active_users = nlohmann::json::array();
  for (std::uint32_t u = 0; u < m.active.users.size(); ++u)
    if (m.active.users[u]) active_users.push_back(data.full.name(UserId{u}));
  nlohmann::json active_contents = nlohmann::json::array();
  for (std::uint32_t c = 0; c < m.active.contents.size(); ++c)
    if (m.active.contents[c]) active_contents.push_back(data.full.name(ContentId{c}));
  nlohmann::json manifest{{"config", config_to_json(cfg)},
                          {"seed", cfg.seed},
                          {"boundary", data.boundary},
                          {"train_requests", data.train.requests.size()},
                          {"test_requests", data.test.requests.size()},
                          {"active_users", active_users},
                          {"active_contents", active_contents},
                          {"tsas_epoch_loss", m.tsas.epoch_loss()}};
  std::ofstream out(dir / "train.json");
  out << manifest.dump(2) << '\n';
}

TrainedModels load_models(const Dataset& data, const RunConfig& cfg, const std::filesystem::path& dir) {
  for (const char* f : {"train.json", "ngram.csv", "watch_stats.csv", "tsas.json", "tsas.bin"})
    if (!std::filesystem::exists(dir / f))
      throw std::runtime_error("missing checkpoint " + (dir / f).string() + "; run the train subcommand first");

  TrainedModels m;
  std::ifstream manifest_in(dir / "train.json");
  const auto manifest = nlohmann::json::parse(manifest_in);
  m.active.users.assign(data.full.user_count(), 0);
  m.active.contents.assign(data.full.content_count(), 0);
  for (const auto& n : manifest.at("active_users")) {
    auto id = data.full.find_user(n.get<std::string>());
    if (!id) throw ParseError("checkpoint user '" + n.get<std::string>() + "' is not in the trace");
    m.active.users[id->value] = 1;
  }
  for (const auto& n : manifest.at("active_contents")) {
    auto id = data.full.find_content(n.get<std::string>());
    if (!id) throw ParseError("checkpoint content '" + n.get<std::string>() + "' is not in the trace");
    m.active.contents[id->value] = 1;
  }
  {
    std::ifstream in(dir / "ngram.csv");
    m.ngram = read_ngram_csv(in, data.full);
  }
  {
    std::ifstream in(dir / "watch_stats.csv");
    m.stats = read_watch_stats_csv(in, data.full, cfg.watch_caps, cfg.default_sigma_s);
  }
  m.tsas = load_tsas(dir / "tsas", data.full);
  return m;
}

}  // namespace pec
