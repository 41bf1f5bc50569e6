#include "rankcal/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>

#include "rankcal/augment.hpp"
#include "rankcal/calibration.hpp"
#include "rankcal/config.hpp"
#include "rankcal/dataset.hpp"
#include "rankcal/errors.hpp"
#include "rankcal/model.hpp"
#include "rankcal/predictions.hpp"
#include "rankcal/trainer.hpp"

namespace rankcal {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_filename(path.stem().string() + suffix);
  return out;
}

std::vector<ClassPair> compound_pairs_for(std::size_t classes) {
  if (classes == 7) return default_compound_pairs();
  std::vector<ClassPair> pairs;
  for (std::size_t k = 0; k < classes; ++k) pairs.push_back({k, (k + 1) % classes});
  return pairs;
}

MlpModel load_checked_model(const fs::path& model_path, const Dataset& data, Split split) {
  MlpModel model = from_model_file(load_model(model_path));
  const auto samples = data.samples(split);
  if (samples.empty()) throw DataError("split " + std::string(split_tag(split)) + " has no samples");
  if (model.dims().input != samples.front().image.size()) {
    throw DataError("model input size " + std::to_string(model.dims().input) + " does not match image size " +
                    std::to_string(samples.front().image.size()));
  }
  if (model.dims().classes != data.manifest.class_count()) {
    throw DataError("model class count " + std::to_string(model.dims().classes) + " does not match dataset class count " +
                    std::to_string(data.manifest.class_count()));
  }
  return model;
}

struct GenToyArgs {
  std::string out;
  ToyGenConfig toy;
  std::size_t n_compound = 220;
};

int cmd_gen_toy(const GenToyArgs& a, std::ostream& out) {
  Dataset data = generate_toy_dataset(a.toy);
  if (a.n_compound > 0) {
    merge_into(data, generate_compound_set_total(a.toy, compound_pairs_for(a.toy.classes), a.n_compound));
  }
  write_dataset(a.out, data);
  out << "classes=" << a.toy.classes << " train=" << data.count(Split::fer_train) << " fr=" << data.count(Split::fr)
      << " compound=" << data.count(Split::compound) << " eval=" << data.count(Split::fer_eval) << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::vector<std::string> settings;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig config = a.config.empty() ? TrainConfig{} : load_config(a.config);
  for (const auto& s : a.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + s + "'");
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  config.validate();
  const auto result = train_to_dir(config, a.data, a.out);
  out << "epochs=" << result.state.epoch;
  if (!result.state.log.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof buf, " eval_acc=%.4f eval_ece=%.4f", result.state.log.back().eval_acc,
                  result.state.log.back().eval_ece);
    out << buf;
  }
  out << " model=" << (fs::path(a.out) / "model.bin").string() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string split = "fer-eval";
  std::size_t bins = 15;
  std::string mode = "width";
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const BinningMode mode = parse_binning(a.mode);
  const Split split = parse_split(a.split);
  const Dataset data = load_dataset(a.data);
  const MlpModel model = load_checked_model(a.model, data, split);
  const auto rows = predict_batch(model, data.samples(split));
  write_predictions(a.out, rows);
  const auto report = reliability_report(rows, a.bins, mode);
  write_reliability_csv(sibling(a.out, ".reliability.csv"), report);
  out << summary_line(report) << '\n';
  return kExitOk;
}

struct CalibArgs {
  std::string pred;
  std::size_t bins = 15;
  std::string mode = "width";
  std::string out;
};

int cmd_calib(const CalibArgs& a, std::ostream& out) {
  const BinningMode mode = parse_binning(a.mode);
  const auto rows = read_predictions(a.pred);
  CalibrationReport report;
  try {
    report = reliability_report(rows, a.bins, mode);
  } catch (const InvalidInput& e) {
    // Problems with the file's contents, not the flags.
    throw DataError(a.pred + ": " + e.what());
  }
  write_reliability_csv(a.out, report);
  char buf[64];
  std::snprintf(buf, sizeof buf, " binned_ece=%.4f", report.binned_ece);
  out << summary_line(report) << buf << '\n';
  return kExitOk;
}

struct SynthArgs {
  std::string a;
  std::string b;
  std::size_t label_a = 0;
  std::size_t label_b = 0;
  std::size_t classes = 7;
  std::string out;
};

int cmd_synth(const SynthArgs& s, std::ostream& out) {
  if (s.label_a == s.label_b) throw InvalidInput("--label-a and --label-b must differ");
  if (s.label_a >= s.classes || s.label_b >= s.classes) throw InvalidInput("labels must be below --classes");
  LabeledSample a{"a", load_image(s.a), s.label_a};
  LabeledSample b{"b", load_image(s.b), s.label_b};
  if (!a.image.same_shape(b.image)) throw DataError("input images differ in shape");
  const auto rec = blend_horizontal(a, b, s.classes);
  save_image(s.out, rec.image);
  std::string line;
  char buf[32];
  for (std::size_t c = 0; c < rec.soft_label.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%s%g", c ? "," : "", rec.soft_label[c]);
    line += buf;
  }
  out << line << '\n';
  return kExitOk;
}

struct CompoundArgs {
  std::string model;
  std::string data;
  std::string out;
};

int cmd_compound_eval(const CompoundArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.data);
  if (data.count(Split::compound) == 0) throw DataError(a.data + ": dataset has no compound split");
  const MlpModel model = load_checked_model(a.model, data, Split::compound);
  const auto rows = predict_batch(model, data.samples(Split::compound));
  const auto pairs = data.constituents(Split::compound);
  const auto result = compound_top2_eval(rows, pairs);
  write_text(a.out, format_heatmap_csv(result));
  const std::string table = format_match_table(result);
  write_text(sibling(a.out, ".matches.csv"), table);
  char buf[64];
  std::snprintf(buf, sizeof buf, "top2_match_rate=%.4f", result.overall_match_rate);
  out << table << buf << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emotion blending, ranking-loss training and calibration tools"};
  app.require_subcommand(1);

  GenToyArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-toy", "Generate the procedural toy face dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.toy.seed, "Generator seed");
  gen_cmd->add_option("--classes", gen.toy.classes, "Number of emotion classes");
  gen_cmd->add_option("--n-train", gen.toy.n_train, "Labeled training samples");
  gen_cmd->add_option("--n-eval", gen.toy.n_eval, "Labeled evaluation samples");
  gen_cmd->add_option("--n-fr", gen.toy.n_fr, "Unlabeled samples");
  gen_cmd->add_option("--n-compound", gen.n_compound, "Compound samples in total");
  gen_cmd->add_option("--sigma", gen.toy.sigma, "Gaussian pixel noise");
  gen_cmd->add_option("--imbalance", gen.toy.imbalance, "Geometric per-class ratio in (0, 1]");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  train_cmd->add_option("--config", tr.config, "Config file of key = value lines");
  train_cmd->add_option("--data", tr.data, "Dataset directory")->required();
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--set", tr.settings, "Override a config key (key=value)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Predict a split and report calibration");
  eval_cmd->add_option("--model", ev.model, "Model file")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset directory")->required();
  eval_cmd->add_option("--split", ev.split, "fer-train, fer-eval, fr or compound");
  eval_cmd->add_option("--bins", ev.bins, "Calibration bins")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--mode", ev.mode, "width or mass")->check(CLI::IsMember({"width", "mass"}));
  eval_cmd->add_option("--out", ev.out, "Predictions CSV")->required();

  CalibArgs ca;
  auto* calib_cmd = app.add_subcommand("calib", "Calibration report for a predictions CSV");
  calib_cmd->add_option("--pred", ca.pred, "Predictions CSV")->required();
  calib_cmd->add_option("--bins", ca.bins, "Calibration bins")->check(CLI::PositiveNumber);
  calib_cmd->add_option("--mode", ca.mode, "width or mass")->check(CLI::IsMember({"width", "mass"}));
  calib_cmd->add_option("--out", ca.out, "Reliability CSV")->required();

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Blend two PGM faces (upper from a, lower from b)");
  synth_cmd->add_option("--a", sy.a, "Upper-half image")->required();
  synth_cmd->add_option("--b", sy.b, "Lower-half image")->required();
  synth_cmd->add_option("--label-a", sy.label_a, "Class of a")->required();
  synth_cmd->add_option("--label-b", sy.label_b, "Class of b")->required();
  synth_cmd->add_option("--classes", sy.classes, "Number of classes")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", sy.out, "Output PGM")->required();

  CompoundArgs co;
  auto* compound_cmd = app.add_subcommand("compound-eval", "Top-2 match rates and heatmap on the compound split");
  compound_cmd->add_option("--model", co.model, "Model file")->required();
  compound_cmd->add_option("--data", co.data, "Dataset directory")->required();
  compound_cmd->add_option("--out", co.out, "Heatmap CSV")->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("rankcal");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_toy(gen, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*calib_cmd) return cmd_calib(ca, out);
    if (*synth_cmd) return cmd_synth(sy, out);
    if (*compound_cmd) return cmd_compound_eval(co, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace rankcal
