// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "../oracle_model.hpp"
#include "../support.hpp"
#include "rankcal/augment.hpp"
#include "rankcal/calibration.hpp"
#include "rankcal/cli.hpp"
#include "rankcal/dataset.hpp"
#include "rankcal/losses.hpp"
#include "rankcal/model.hpp"
#include "rankcal/pseudolabel.hpp"
#include "rankcal/trainer.hpp"

namespace fs = std::filesystem;
using namespace rankcal;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

// ---------------------------------------------------------------- 1

Outcome metric_oracles() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<double> conf = {0.6, 0.7, 0.9, 0.95};
  const bool correct[] = {false, true, true, true};
  const auto width = bin_equal_width(conf, correct, 2);
  const double e = ece(width, 4), m = mce(width), a = aece(conf, correct, 2);
  o.require(std::abs(e - 0.0375) <= 1e-9, "ECE " + fmt("%.12f", e));
  o.require(std::abs(m - 0.0375) <= 1e-9, "MCE " + fmt("%.12f", m));
  o.require(std::abs(a - 0.1125) <= 1e-9, "AECE " + fmt("%.12f", a));

  Rng rng(2024);
  const std::size_t n = 10000;
  std::vector<double> c(n);
  std::unique_ptr<bool[]> hit(new bool[n]);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = rng.uniform01();
    hit[i] = rng.uniform01() < c[i];
  }
  const double stream = ece(bin_equal_width(c, std::span<const bool>(hit.get(), n), 15), n);
  o.require(stream < 0.03, "Bernoulli stream ECE " + fmt("%.4f", stream));
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime " + fmt("%.3f s", t));
  o.note("ece=" + fmt("%.4f", e) + " mce=" + fmt("%.4f", m) + " aece=" + fmt("%.4f", a) +
         " stream_ece=" + fmt("%.4f", stream) + " time=" + fmt("%.3fs", t));
  return o;
}

// ---------------------------------------------------------------- 2

Outcome gradient_checks() {
  Outcome o;
  const auto t0 = Clock::now();
  const FocalConfig focal;

  // Focal, hard and soft targets.
  double worst_focal = 0.0;
  Rng rng(101);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 2 + rng.uniform_index(8);
    auto z = support::random_vector(rng, k, -4, 4);
    const std::size_t t = rng.uniform_index(k);
    auto y = support::random_simplex(rng, k);
    auto num = support::numeric_gradient([&](const std::vector<double>& x) { return focal_loss(x, t, focal).value; }, z);
    worst_focal = std::max(worst_focal, support::max_relative_error(focal_loss(z, t, focal).grad, num));
    num = support::numeric_gradient([&](const std::vector<double>& x) { return focal_loss(x, y, focal).value; }, z);
    worst_focal = std::max(worst_focal, support::max_relative_error(focal_loss(z, y, focal).grad, num));
  }
  o.require(worst_focal < 1e-4, "focal " + fmt("%.2e", worst_focal));

  // Ranking, both readings. Instances at a hinge kink or top-1 tie, where
  // the loss is not differentiable, are redrawn.
  for (RankMode mode : {RankMode::label_indexed, RankMode::top1}) {
    double worst = 0.0;
    int done = 0;
    while (done < 100) {
      const std::size_t k = 2 + rng.uniform_index(6);
      auto z = support::random_vector(rng, 3 * k, -3, 3);
      const std::size_t c1 = rng.uniform_index(k), c2 = (c1 + 1 + rng.uniform_index(k - 1)) % k;
      const double margin = rng.uniform(0.0, 0.5);
      auto eval = [&](const std::vector<double>& x) {
        std::span<const double> s(x);
        return ranking_loss({s.subspan(0, k), s.subspan(k, k), s.subspan(2 * k, k), c1, c2, margin, mode});
      };
      std::span<const double> s(z);
      const auto ps = softmax(s.subspan(0, k)), pf = softmax(s.subspan(k, k)), pr = softmax(s.subspan(2 * k, k));
      auto gap = [](const ProbVector& p) {
        const auto t = top_k(p, 2);
        return t[0].value - t[1].value;
      };
      double h1, h2;
      if (mode == RankMode::label_indexed) {
        h1 = ps[c1] - pf[c1] + margin;
        h2 = ps[c2] - pr[c2] + margin;
      } else {
        if (gap(ps) < 1e-3 || gap(pf) < 1e-3 || gap(pr) < 1e-3) continue;
        const double top = top_k(ps, 1)[0].value;
        h1 = top - top_k(pf, 1)[0].value + margin;
        h2 = top - top_k(pr, 1)[0].value + margin;
      }
      if (std::abs(h1) < 1e-3 || std::abs(h2) < 1e-3) continue;
      ++done;
      const auto b = eval(z);
      std::vector<double> analytic = b.grad_syn;
      analytic.insert(analytic.end(), b.grad_fer.begin(), b.grad_fer.end());
      analytic.insert(analytic.end(), b.grad_fr.begin(), b.grad_fr.end());
      const auto num = support::numeric_gradient([&](const std::vector<double>& x) { return eval(x).value; }, z);
      worst = std::max(worst, support::max_relative_error(analytic, num));
    }
    o.require(worst < 1e-4, std::string("ranking ") + rank_mode_tag(mode) + " " + fmt("%.2e", worst));
    o.note(std::string("rank_") + rank_mode_tag(mode) + "=" + fmt("%.1e", worst));
  }

  // Two-layer model under a batch focal loss; pre-activations within 1e-3
  // of the rectifier kink are redrawn.
  double worst_model = 0.0;
  int done = 0;
  while (done < 100) {
    const ModelDims dims{2 + rng.uniform_index(6), 2 + rng.uniform_index(5), 2 + rng.uniform_index(4)};
    MlpModel m(dims);
    for (double& p : m.params()) p = rng.uniform(-1, 1);
    Matrix x(1 + rng.uniform_index(4), dims.input);
    for (double& v : x.data()) v = rng.uniform01();
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < x.rows(); ++i) labels.push_back(rng.uniform_index(dims.classes));
    const auto pass = forward(m, x, kernels::Exec::serial);
    {
      bool near_kink = false;
      for (std::size_t i = 0; i < x.rows() && !near_kink; ++i)
        for (std::size_t j = 0; j < dims.hidden && !near_kink; ++j) {
          double sum = m.b1()[j];
          for (std::size_t q = 0; q < dims.input; ++q) sum += x(i, q) * m.w1()[q * dims.hidden + j];
          near_kink = std::abs(sum) < 1e-3;
        }
      if (near_kink) continue;
    }
    ++done;
    Matrix up(x.rows(), dims.classes);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto g = focal_loss(pass.logits.row(i), labels[i], focal).grad;
      std::copy(g.begin(), g.end(), up.row(i).begin());
    }
    const auto analytic = backward(m, pass, up, kernels::Exec::serial);
    const auto num = support::numeric_gradient(
        [&](const std::vector<double>& p) {
          MlpModel probe(dims);
          std::copy(p.begin(), p.end(), probe.params().begin());
          const auto f = forward(probe, x, kernels::Exec::serial);
          double sum = 0.0;
          for (std::size_t i = 0; i < x.rows(); ++i) sum += focal_loss(f.logits.row(i), labels[i], focal).value;
          return sum;
        },
        std::vector<double>(m.params().begin(), m.params().end()));
    worst_model = std::max(worst_model, support::max_relative_error(analytic, num));
  }
  o.require(worst_model < 1e-4, "model " + fmt("%.2e", worst_model));
  const double t = seconds_since(t0);
  o.require(t < 10.0, "runtime " + fmt("%.2f s", t));
  o.note("focal=" + fmt("%.1e", worst_focal) + " model=" + fmt("%.1e", worst_model) + " time=" + fmt("%.2fs", t));
  return o;
}

// ---------------------------------------------------------------- 3

Outcome threshold_schedule() {
  Outcome o;
  const double t0 = scheduled_threshold(0.97, 0, 0.9);
  o.require(std::abs(t0 - 0.43650) <= 1e-9, "T(0) = " + fmt("%.12f", t0));
  bool increasing = true;
  double prev = t0, last = t0;
  std::size_t t = 1;
  // Strictly increasing until the sigmoid rounds to 1 in double precision.
  for (; t < 100; ++t) {
    const double v = scheduled_threshold(0.97, t, 0.9);
    if (v == prev) break;
    increasing &= v > prev;
    prev = v;
    last = v;
  }
  o.require(increasing && t > 30, "strictly increasing");
  double sup = last;
  for (std::size_t s = 0; s < 100000; s += 7) sup = std::max(sup, scheduled_threshold(0.97, s, 0.9));
  o.require(std::abs(sup - 0.873) <= 1e-9, "sup " + fmt("%.12f", sup));

  std::vector<ProbVector> preds = {{0.9, 0.1}, {0.8, 0.2}};
  std::vector<std::size_t> labels = {0, 0};
  const auto state = compute_class_thresholds(preds, labels, 5, 2, PseudoLabelConfig{});
  o.require(state.thresholds[1] == 0.95, "fallback " + fmt("%.17g", state.thresholds[1]));
  o.note("T0=" + fmt("%.5f", t0) + " sup=" + fmt("%.9f", sup) + " increasing_through_t=" + std::to_string(t - 1) +
         " fallback=" + fmt("%.2f", state.thresholds[1]));
  return o;
}

// ---------------------------------------------------------------- 4

Outcome blend_provenance() {
  Outcome o;
  Rng rng(404);
  std::size_t pixels = 0;
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    const std::size_t h = 2 + rng.uniform_index(31), w = 1 + rng.uniform_index(31), k = 2 + rng.uniform_index(13);
    const std::size_t c1 = rng.uniform_index(k), c2 = (c1 + 1 + rng.uniform_index(k - 1)) % k;
    std::vector<double> pa(h * w), pb(h * w);
    for (double& v : pa) v = rng.uniform01();
    for (double& v : pb) v = rng.uniform01();
    const LabeledSample a{"a", ImageTensor(h, w, pa), c1}, b{"b", ImageTensor(h, w, pb), c2};
    const auto rec = blend_horizontal(a, b, k);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) {
        const double want = r < h / 2 ? a.image(r, c) : b.image(r, c);
        if (rec.image(r, c) != want) o.require(false, "pixel provenance at trial " + std::to_string(trial));
        ++pixels;
      }
    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double want = (c == c1 || c == c2) ? 0.5 : 0.0;
      if (rec.soft_label[c] != want) o.require(false, "soft label at trial " + std::to_string(trial));
      nonzero += rec.soft_label[c] != 0.0;
    }
    if (nonzero != 2) o.require(false, "soft label support at trial " + std::to_string(trial));
  }
  o.note("pairs=1000 pixels_checked=" + std::to_string(pixels));
  return o;
}

// ---------------------------------------------------------------- 5

Outcome pseudo_label_contract() {
  Outcome o;
  Rng rng(505);
  std::size_t accepted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(7);
    std::vector<double> p, thresholds(k);
    if (trial % 2) {
      p = support::random_simplex(rng, k);
      for (double& v : thresholds) v = rng.uniform01();
    } else {
      p.resize(k);
      for (double& v : p) v = static_cast<double>(rng.uniform_index(6)) / 10.0;
      for (double& v : thresholds) v = static_cast<double>(rng.uniform_index(6)) / 10.0;
    }
    ThresholdState state;
    state.thresholds = thresholds;
    const auto got = assign_pseudo_label(p, state);
    // Masked vector, then the first index attaining its maximum.
    std::vector<double> masked(k, 0.0);
    bool any = false;
    for (std::size_t c = 0; c < k; ++c)
      if (p[c] > thresholds[c]) {
        masked[c] = p[c];
        any = true;
      }
    std::optional<std::size_t> want;
    if (any) {
      double best = -1.0;
      for (std::size_t c = 0; c < k; ++c)
        if (p[c] > thresholds[c] && masked[c] > best) {
          best = masked[c];
          want = c;
        }
    }
    if (got.label != want) o.require(false, "oracle disagreement at trial " + std::to_string(trial));
    if (got.label && !(p[*got.label] > thresholds[*got.label])) o.require(false, "non-strict acceptance");
    accepted += got.accepted();
  }
  o.note("cases=1000 accepted=" + std::to_string(accepted));
  return o;
}

// ---------------------------------------------------------------- 6

Outcome compound_top2_oracle() {
  Outcome o;
  Rng rng(606);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(7);
    std::vector<double> p(k);
    if (trial % 2) {
      p = support::random_simplex(rng, k);
    } else {
      for (double& v : p) v = static_cast<double>(rng.uniform_index(4));
    }
    const std::size_t c1 = rng.uniform_index(k), c2 = (c1 + 1 + rng.uniform_index(k - 1)) % k;
    auto outranks = [&](std::size_t x, std::size_t y) { return p[x] > p[y] || (p[x] == p[y] && x < y); };
    bool want = false;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        if (a == b) continue;
        bool top = true;
        for (std::size_t q = 0; q < k; ++q)
          if (q != a && q != b) top = top && outranks(a, q) && outranks(b, q);
        if (top) want = want || (a == c1 && b == c2) || (a == c2 && b == c1);
      }
    if (top2_match(p, {c1, c2}) != want) o.require(false, "oracle disagreement at trial " + std::to_string(trial));
  }

  ToyGenConfig toy;
  const auto set = generate_compound_set_total(toy, default_compound_pairs(), 220);
  const auto rows = predict_batch(support::half_detector_model(toy), set.samples(Split::compound));
  const double rate = compound_top2_eval(rows, set.constituents(Split::compound)).overall_match_rate;
  o.require(rate == 1.0, "oracle fixture match rate " + fmt("%.4f", rate));
  o.note("distributions=1000 fixture_match_rate=" + fmt("%.4f", rate));
  return o;
}

// ---------------------------------------------------------------- 7, 8, 9

struct RunResult {
  std::uint64_t seed = 0;
  std::string name;
  double ece = 0.0;
  double acc = 0.0;
  double top2 = 0.0;
  double seconds = 0.0;
};

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::cerr << "command failed (" << code << "): " << err.str();
  return code;
}

const std::vector<std::string> kAblation = {"--set", "w_rank=0", "--set", "syn_focal=false", "--set", "fr_focal=false"};

RunResult train_and_score(const fs::path& data, const fs::path& out, std::uint64_t seed, const std::string& name,
                          const std::vector<std::string>& extra) {
  std::vector<std::string> args = {"train", "--data", data.string(), "--out", out.string(), "--set",
                                   "seed=" + std::to_string(seed)};
  args.insert(args.end(), extra.begin(), extra.end());
  const auto t0 = Clock::now();
  if (cli(args) != 0) throw std::runtime_error("training failed for " + name);
  RunResult r{seed, name};
  r.seconds = seconds_since(t0);
  const Dataset dataset = load_dataset(data);
  const MlpModel model = from_model_file(load_model(out / "model.bin"));
  const auto report = reliability_report(predict_batch(model, dataset.samples(Split::fer_eval)), 15,
                                         BinningMode::equal_width);
  r.ece = report.ece;
  r.acc = report.acc;
  r.top2 = compound_top2_eval(predict_batch(model, dataset.samples(Split::compound)),
                              dataset.constituents(Split::compound))
               .overall_match_rate;
  return r;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct Experiment {
  std::vector<RunResult> runs;
  fs::path work;
};

Outcome directional(Experiment& exp) {
  Outcome o;
  std::vector<double> ece_full, ece_abl, top_full, top_abl;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const fs::path data = exp.work / ("data" + std::to_string(seed));
    if (cli({"gen-toy", "--out", data.string(), "--seed", std::to_string(seed), "--n-train", "700", "--n-fr", "300",
             "--n-compound", "220", "--sigma", "0.05"}) != 0) {
      o.require(false, "gen-toy seed " + std::to_string(seed));
      return o;
    }
    const auto full = train_and_score(data, exp.work / ("full" + std::to_string(seed)), seed, "full", {});
    const auto abl = train_and_score(data, exp.work / ("ablation" + std::to_string(seed)), seed, "ablation", kAblation);
    for (const auto& r : {full, abl}) {
      o.require(r.seconds < 120.0, r.name + " seed " + std::to_string(seed) + " took " + fmt("%.1f s", r.seconds));
      exp.runs.push_back(r);
    }
    ece_full.push_back(full.ece);
    ece_abl.push_back(abl.ece);
    top_full.push_back(full.top2);
    top_abl.push_back(abl.top2);
  }
  const double ef = median(ece_full), ea = median(ece_abl), tf = median(top_full), ta = median(top_abl);
  o.require(ef <= ea, "(a) median ECE full " + fmt("%.4f", ef) + " > ablation " + fmt("%.4f", ea));
  o.require(tf >= ta, "(b) median top-2 full " + fmt("%.4f", tf) + " < ablation " + fmt("%.4f", ta));
  o.note("median ece full=" + fmt("%.4f", ef) + " ablation=" + fmt("%.4f", ea) + "; median top2 full=" +
         fmt("%.4f", tf) + " ablation=" + fmt("%.4f", ta));
  return o;
}

Outcome confidence_ordering(const Experiment& exp) {
  Outcome o;
  const fs::path data = exp.work / "data1";
  const fs::path model_path = exp.work / "full1" / "model.bin";
  if (!fs::exists(model_path)) {
    o.require(false, "seed-1 full model missing");
    return o;
  }
  const Dataset dataset = load_dataset(data);
  const MlpModel model = from_model_file(load_model(model_path));
  const auto eval = dataset.samples(Split::fer_eval);
  // Fresh blends: each eval face paired with the next eval face of another class.
  std::vector<LabeledSample> blends;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    for (std::size_t step = 1; step < eval.size(); ++step) {
      const auto& partner = eval[(i + step) % eval.size()];
      if (partner.label == eval[i].label) continue;
      blends.push_back({"blend", blend_horizontal(eval[i], partner, dataset.manifest.class_count()).image, std::nullopt});
      break;
    }
  }
  auto mean_top1 = [&](const std::vector<LabeledSample>& samples) {
    double sum = 0.0;
    for (const auto& row : predict_batch(model, samples)) sum += *std::max_element(row.probs.begin(), row.probs.end());
    return sum / static_cast<double>(samples.size());
  };
  const double original = mean_top1(eval), synthetic = mean_top1(blends);
  o.require(original > synthetic, "original " + fmt("%.4f", original) + " <= synthetic " + fmt("%.4f", synthetic));
  o.note("mean top-1 original=" + fmt("%.4f", original) + " synthetic=" + fmt("%.4f", synthetic) +
         " (n=" + std::to_string(eval.size()) + "/" + std::to_string(blends.size()) + ")");
  return o;
}

Outcome determinism(const Experiment& exp) {
  Outcome o;
  const fs::path data = exp.work / "data1";
  for (const char* run : {"det_a", "det_b"}) {
    if (cli({"train", "--data", data.string(), "--out", (exp.work / run).string(), "--set", "seed=1"}) != 0) {
      o.require(false, std::string("train ") + run);
      return o;
    }
  }
  for (const char* file : {"model.bin", "metrics.csv"}) {
    const auto a = support::read_text(exp.work / "det_a" / file), b = support::read_text(exp.work / "det_b" / file);
    o.require(!a.empty() && a == b, std::string(file) + " differs");
    o.note(std::string(file) + " " + std::to_string(a.size()) + " bytes");
  }
  return o;
}

void write_results(const fs::path& dir, const Experiment& exp, const std::string& lines) {
  fs::create_directories(dir);
  std::string csv = "seed,config,eval_ece,eval_acc,top2_match_rate,train_seconds\n";
  for (const auto& r : exp.runs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu,%s,%.6f,%.6f,%.6f,%.2f\n", static_cast<unsigned long long>(r.seed),
                  r.name.c_str(), r.ece, r.acc, r.top2, r.seconds);
    csv += buf;
  }
  support::write_text(dir / "directional.csv", csv);
  support::write_text(dir / "acceptance.txt", lines);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path results;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--results") results = argv[i + 1];
  }

  support::TempDir work("acceptance");
  Experiment exp{{}, work.path()};
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"metric oracles", metric_oracles},
      {"gradient checks", gradient_checks},
      {"threshold schedule", threshold_schedule},
      {"blend provenance", blend_provenance},
      {"pseudo-label contract", pseudo_label_contract},
      {"compound top-2 oracle", compound_top2_oracle},
      {"directional experiment", [&] { return directional(exp); }},
      {"confidence ordering", [&] { return confidence_ordering(exp); }},
      {"determinism", [&] { return determinism(exp); }},
  };

  std::string lines;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += o.pass ? 0 : 1;
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + " " + std::to_string(i + 1) + " " +
                             criteria[i].name + ": " + o.detail + "\n";
    std::cout << line << std::flush;
    lines += line;
  }
  const std::string summary = std::to_string(criteria.size() - failures) + "/" + std::to_string(criteria.size()) +
                              " criteria passed\n";
  std::cout << summary;
  lines += summary;
  if (!results.empty()) write_results(results, exp, lines);
  return failures == 0 ? 0 : 1;
}
