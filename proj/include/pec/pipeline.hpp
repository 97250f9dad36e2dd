#pragma once

#include <filesystem>

#include "pec/config.hpp"
#include "pec/fusion.hpp"
#include "pec/ngram.hpp"

namespace pec {

struct Dataset {
  Trace full;
  Trace train;
  Trace test;
  /// First timestamp of the test period.
  Seconds boundary = 0.0;
};

/// Splits so that the last `test_span` seconds of the trace form the test set.
Dataset split_dataset(Trace full, Seconds test_span);

/// Reads the configured trace, or generates the synthetic one, and splits it.
Dataset load_dataset(const RunConfig& cfg);

struct TrainedModels {
  ActiveSets active;
  NGramModel ngram;
  TsasModel tsas;
  WatchTimeStats stats;
};

TrainedModels train_models(const Dataset& data, const RunConfig& cfg, const EpochCallback& on_epoch = {});

void save_models(const TrainedModels& models, const Dataset& data, const RunConfig& cfg,
                 const std::filesystem::path& dir);
/// Throws std::runtime_error naming the first missing checkpoint file.
TrainedModels load_models(const Dataset& data, const RunConfig& cfg, const std::filesystem::path& dir);

/// Writes `<path>.meta.json` holding the resolved config next to a CSV artifact.
void write_sidecar(const std::filesystem::path& path, const RunConfig& cfg, const nlohmann::json& extra = {});

}  // namespace pec
