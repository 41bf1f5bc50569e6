#include "rankcal/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rankcal/calibration.hpp"
#include "rankcal/errors.hpp"
#include "rankcal/losses.hpp"

namespace rankcal {

TrainData TrainData::from_dataset(const Dataset& data) {
  TrainData out;
  out.classes = data.manifest.class_count();
  out.fer_train = data.samples(Split::fer_train);
  out.fer_eval = data.samples(Split::fer_eval);
  out.fr = data.samples(Split::fr);
  return out;
}

TrainState init_train_state(const MlpModel& model, const TrainConfig& config) {
  TrainState state;
  state.adam = AdamState::for_size(model.params().size(), config.lr);
  return state;
}

namespace {

std::vector<ImageTensor> images_of(std::span<const LabeledSample> samples) {
  std::vector<ImageTensor> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.image);
  return out;
}

bool uses_fr(const TrainConfig& c) {
  const bool blends_need_fr = c.pairing != Pairing::fer_fer && (c.w_rank > 0.0 || c.syn_focal);
  return c.fr_focal || blends_need_fr;
}

bool uses_blends(const TrainConfig& c) { return c.w_rank > 0.0 || c.syn_focal; }

struct Blend {
  BlendRecord record;
  std::size_t fer_index;      // row in the FER group
  GroupRef second;            // accepted-FR row or FER row
};

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace

void train_epoch(TrainState& state, MlpModel& model, const TrainData& data, const TrainConfig& config, Rng& rng,
                 std::vector<BlendTrace>* trace) {
  if (data.fer_train.empty()) throw InvalidInput("training needs a non-empty FER split");
  const std::size_t classes = data.classes;
  const WeakAugment aug;

  std::vector<std::size_t> fer_labels;
  fer_labels.reserve(data.fer_train.size());
  for (const auto& s : data.fer_train) fer_labels.push_back(s.label.value());
  const auto fer_images = images_of(data.fer_train);
  const auto fer_probs = predict_probs(model, fer_images);
  state.thresholds = compute_class_thresholds(fer_probs, fer_labels, state.epoch, classes, config.pseudo);
  state.threshold_history.push_back(state.thresholds);

  std::vector<std::size_t> order(data.fer_train.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::size_t> fr_order(data.fr.size());
  std::iota(fr_order.begin(), fr_order.end(), 0);
  rng.shuffle(fr_order);
  std::size_t fr_cursor = 0;

  const bool with_fr = uses_fr(config) && !data.fr.empty();
  const bool with_blends = uses_blends(config);
  const BatchPredictor predictor = [&model](std::span<const ImageTensor> imgs) { return predict_probs(model, imgs); };
  const ObjectiveConfig objective{config.w_rank, config.syn_focal, config.fr_focal};

  EpochLog entry;
  entry.epoch = state.epoch + 1;
  std::size_t steps = 0;
  std::size_t fr_drawn = 0;
  std::size_t fr_accepted = 0;

  for (std::size_t start = 0; start < order.size(); start += config.batch) {
    const std::size_t end = std::min(order.size(), start + config.batch);

    std::vector<LabeledSample> fer_batch;
    for (std::size_t k = start; k < end; ++k) {
      LabeledSample s = data.fer_train[order[k]];
      if (config.augment_fer) s.image = weak_augment(s.image, aug, rng);
      fer_batch.push_back(std::move(s));
    }

    std::vector<LabeledSample> accepted;
    if (with_fr) {
      const std::size_t take = std::min(data.fr.size(), config.batch * config.fr_ratio);
      std::vector<ImageTensor> fr_images;
      std::vector<std::size_t> fr_ids;
      for (std::size_t k = 0; k < take; ++k) {
        const std::size_t idx = fr_order[fr_cursor];
        fr_cursor = (fr_cursor + 1) % fr_order.size();
        fr_images.push_back(data.fr[idx].image);
        fr_ids.push_back(idx);
      }
      const auto labeled = pseudo_label_batch(fr_images, predictor, state.thresholds, rng, config.pseudo, aug);
      fr_drawn += take;
      for (const auto& p : labeled) {
        if (!p.prediction.accepted()) continue;
        accepted.push_back({data.fr[fr_ids[p.index]].id, p.view_a, p.prediction.label});
      }
      fr_accepted += accepted.size();
    }

    std::vector<Blend> blends;
    if (with_blends) {
      std::size_t fr_rr = 0;
      const bool want_fr = config.pairing != Pairing::fer_fer;
      const bool want_fer = config.pairing != Pairing::fer_fr;
      for (std::size_t i = 0; i < fer_batch.size(); ++i) {
        const std::size_t label = *fer_batch[i].label;
        if (want_fr) {
          for (std::size_t tries = 0; tries < accepted.size(); ++tries) {
            const std::size_t j = (fr_rr + tries) % accepted.size();
            if (*accepted[j].label == label) continue;
            blends.push_back({blend_horizontal(fer_batch[i], accepted[j], classes), i, {Group::fr, j}});
            fr_rr = j + 1;
            break;
          }
        }
        if (want_fer) {
          for (std::size_t step = 1; step < fer_batch.size(); ++step) {
            const std::size_t j = (i + step) % fer_batch.size();
            if (*fer_batch[j].label == label) continue;
            blends.push_back({blend_horizontal(fer_batch[i], fer_batch[j], classes), i, {Group::fer, j}});
            break;
          }
        }
      }
    }
    if (trace) {
      for (const auto& b : blends) {
        trace->push_back({b.record.parent_a, b.record.parent_b, b.record.c1, b.record.c2,
                          b.second.group == Group::fr ? Split::fr : Split::fer_train});
      }
    }

    std::vector<ImageTensor> all;
    all.reserve(fer_batch.size() + accepted.size() + blends.size());
    for (const auto& s : fer_batch) all.push_back(s.image);
    for (const auto& s : accepted) all.push_back(s.image);
    for (const auto& b : blends) all.push_back(b.record.image);
    const ForwardPass pass = forward(model, images_to_batch(all));
    const std::size_t fr_at = fer_batch.size();
    const std::size_t syn_at = fr_at + accepted.size();

    ObjectiveTerms terms;
    for (std::size_t i = 0; i < fer_batch.size(); ++i) {
      terms.fer.push_back(focal_loss(pass.logits.row(i), *fer_batch[i].label, config.focal));
    }
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      terms.fr.push_back(focal_loss(pass.logits.row(fr_at + i), *accepted[i].label, config.focal));
    }
    for (std::size_t i = 0; i < blends.size(); ++i) {
      terms.syn.push_back(focal_loss(pass.logits.row(syn_at + i), blends[i].record.soft_label, config.focal));
      const auto& b = blends[i];
      const std::size_t second_row = b.second.group == Group::fr ? fr_at + b.second.index : b.second.index;
      RankingInputs in{pass.logits.row(syn_at + i), pass.logits.row(b.fer_index), pass.logits.row(second_row),
                       b.record.c1, b.record.c2, config.delta, config.rank_mode};
      terms.rank.push_back({i, {Group::fer, b.fer_index}, b.second, ranking_loss(in)});
    }
    const ObjectiveResult result = total_loss(terms, objective, classes);

    Matrix grad_logits(all.size(), classes);
    auto place = [&](const Matrix& g, std::size_t offset) {
      for (std::size_t i = 0; i < g.rows(); ++i) {
        std::copy(g.row(i).begin(), g.row(i).end(), grad_logits.row(offset + i).begin());
      }
    };
    place(result.grad_fer, 0);
    place(result.grad_fr, fr_at);
    place(result.grad_syn, syn_at);
    const auto grads = backward(model, pass, grad_logits);
    check_finite(grads, "parameter gradients");
    adam_step(model.params(), grads, state.adam);

    entry.focal_fer += result.focal_fer;
    entry.focal_fr += result.focal_fr;
    entry.focal_syn += result.focal_syn;
    entry.rank += result.rank;
    ++steps;
  }
  const auto n = static_cast<double>(steps);
  entry.focal_fer /= n;
  entry.focal_fr /= n;
  entry.focal_syn /= n;
  entry.rank /= n;
  entry.accept_rate = fr_drawn ? static_cast<double>(fr_accepted) / static_cast<double>(fr_drawn) : 0.0;

  if (!data.fer_eval.empty()) {
    const auto rows = predict_batch(model, data.fer_eval);
    const auto report = reliability_report(rows, config.bins, BinningMode::equal_width);
    entry.eval_acc = report.acc;
    entry.eval_ece = report.ece;
  }
  check_finite(model.params(), "model parameters");
  state.log.push_back(entry);
  state.epoch += 1;
}

TrainResult train(const TrainConfig& config, const TrainData& data) {
  config.validate();
  if (data.fer_train.empty()) throw InvalidInput("training needs a non-empty FER split");
  const std::size_t input = data.fer_train.front().image.size();
  Rng rng(config.seed);
  TrainResult result;
  result.initial = init_model({input, config.hidden_dim, data.classes}, rng);
  result.model = result.initial;
  result.state = init_train_state(result.model, config);
  for (std::size_t e = 0; e < config.epochs; ++e) train_epoch(result.state, result.model, data, config, rng);
  return result;
}

std::string format_metrics_log(const std::vector<EpochLog>& log) {
  std::string out = "epoch,focal_fer,focal_fr,focal_syn,rank,accept_rate,eval_acc,eval_ece\n";
  char buf[256];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n", e.epoch, e.focal_fer, e.focal_fr,
                  e.focal_syn, e.rank, e.accept_rate, e.eval_acc, e.eval_ece);
    out += buf;
  }
  return out;
}

std::string format_thresholds(const std::vector<ThresholdState>& history) {
  std::string out = "epoch,class,threshold\n";
  char buf[128];
  for (const auto& t : history) {
    for (std::size_t c = 0; c < t.thresholds.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.9f\n", t.epoch, c, t.thresholds[c]);
      out += buf;
    }
  }
  return out;
}

std::vector<PredictionRow> predict_batch(const MlpModel& model, std::span<const LabeledSample> samples) {
  std::vector<ImageTensor> images = images_of(samples);
  const auto probs = predict_probs(model, images);
  std::vector<PredictionRow> rows;
  rows.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) rows.push_back({samples[i].id, samples[i].label, probs[i]});
  return rows;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

TrainResult train_to_dir(const TrainConfig& config, const std::filesystem::path& data_dir,
                         const std::filesystem::path& out_dir) {
  config.validate();
  const Dataset dataset = load_dataset(data_dir);
  const TrainData data = TrainData::from_dataset(dataset);
  if (data.fer_train.empty()) throw DataError(data_dir.string() + ": no fer-train samples in manifest");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "config.resolved.txt", format_config(config));
  TrainResult result = train(config, data);
  save_model(out_dir / "model.bin", to_model_file(result.model));
  write_text(out_dir / "metrics.csv", format_metrics_log(result.state.log));
  write_text(out_dir / "thresholds.csv", format_thresholds(result.state.threshold_history));
  return result;
}

}  // namespace rankcal
