#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rankcal/augment.hpp"
#include "rankcal/config.hpp"
#include "rankcal/dataset.hpp"
#include "rankcal/model.hpp"
#include "rankcal/predictions.hpp"
#include "rankcal/pseudolabel.hpp"

namespace rankcal {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double focal_fer = 0.0;
  double focal_fr = 0.0;
  double focal_syn = 0.0;
  double rank = 0.0;
  double accept_rate = 0.0;
  double eval_acc = 0.0;
  double eval_ece = 0.0;
};

struct TrainState {
  std::size_t epoch = 0;  // completed epochs; also the t used for thresholds
  AdamState adam;
  ThresholdState thresholds;
  std::vector<ThresholdState> threshold_history;
  std::vector<EpochLog> log;
};

struct TrainData {
  std::size_t classes = 0;
  std::vector<LabeledSample> fer_train;
  std::vector<LabeledSample> fer_eval;
  std::vector<LabeledSample> fr;

  static TrainData from_dataset(const Dataset& data);
};

// Per-step record of the synthetic samples built for a batch; used by tests
// to check the pairing rules.
struct BlendTrace {
  std::string parent_a;
  std::string parent_b;
  std::size_t c1 = 0;
  std::size_t c2 = 0;
  Split second_split = Split::fr;
};

TrainState init_train_state(const MlpModel& model, const TrainConfig& config);

// One pass over the FER training split:
//  1. thresholds from the current model on the un-augmented FER split;
//  2. per shuffled mini-batch: weak-augment FER, pseudo-label an FR batch,
//     pair each FER sample round-robin with a differently labeled partner,
//     blend, forward, total loss, backward, Adam;
//  3. evaluate on fer-eval and append one log entry.
// `trace`, when given, receives every blend made during the epoch.
void train_epoch(TrainState& state, MlpModel& model, const TrainData& data, const TrainConfig& config, Rng& rng,
                 std::vector<BlendTrace>* trace = nullptr);

struct TrainResult {
  MlpModel initial;
  MlpModel model;
  TrainState state;
};

// Initializes from config.seed and runs config.epochs epochs.
TrainResult train(const TrainConfig& config, const TrainData& data);

// Writes model.bin, metrics.csv, thresholds.csv and config.resolved.txt.
TrainResult train_to_dir(const TrainConfig& config, const std::filesystem::path& data_dir,
                         const std::filesystem::path& out_dir);

std::string format_metrics_log(const std::vector<EpochLog>& log);
std::string format_thresholds(const std::vector<ThresholdState>& history);

std::vector<PredictionRow> predict_batch(const MlpModel& model, std::span<const LabeledSample> samples);

}  // namespace rankcal
