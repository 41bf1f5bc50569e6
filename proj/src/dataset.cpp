#include "rankcal/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "rankcal/errors.hpp"
#include "rankcal/numcore.hpp"

namespace rankcal {

namespace {

// Eight-block signatures. Codes 0..6 are the lines of the Fano plane with an
// eighth point appended; codes 7..13 are their complements. Any two of the
// first seven share exactly two blocks, so all pairwise Hamming distances
// among them are 4.
constexpr std::array<std::uint8_t, kMaxToyClasses> make_codes() {
  constexpr std::array<std::array<int, 3>, 7> lines = {{
      {0, 1, 3}, {1, 2, 4}, {2, 3, 5}, {3, 4, 6}, {4, 5, 0}, {5, 6, 1}, {6, 0, 2}}};
  std::array<std::uint8_t, kMaxToyClasses> codes{};
  for (std::size_t k = 0; k < 7; ++k) {
    std::uint8_t code = 1u << 7;
    for (int p : lines[k]) code |= static_cast<std::uint8_t>(1u << p);
    codes[k] = code;
    codes[k + 7] = static_cast<std::uint8_t>(~code);
  }
  return codes;
}

constexpr auto kCodes = make_codes();

std::uint8_t upper_code(std::size_t k) { return kCodes[k]; }
std::uint8_t lower_code(std::size_t k) { return kCodes[(k + 7) % kMaxToyClasses]; }

void validate_shape(const ToyGenConfig& config) {
  if (config.classes < 2 || config.classes > kMaxToyClasses) {
    throw InvalidInput("toy generator supports 2.." + std::to_string(kMaxToyClasses) + " classes");
  }
  if (config.height < 4 || config.width < 4) throw InvalidInput("toy images must be at least 4x4");
  if (!(config.sigma >= 0.0)) throw InvalidInput("noise sigma must be non-negative");
}

// Bit (block_row, region): four bands of rows per half, region 0 the outer
// quarter columns on both sides, region 1 the central half. Mirroring the
// columns maps every region onto itself, so horizontal flips keep the class.
double pattern_value(std::uint8_t code, std::size_t block_row, std::size_t region) {
  const std::size_t bit = block_row * 2 + region;
  return ((code >> bit) & 1u) ? kPatternHigh : kPatternLow;
}

ImageTensor noisy_sample(const ToyGenConfig& config, std::size_t upper_class, std::size_t lower_class,
                         Rng& rng) {
  ImageTensor img = class_prototype(config, upper_class, lower_class);
  if (config.sigma == 0.0) return img;
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      img.at(r, c) = std::clamp(img(r, c) + config.sigma * rng.normal(), 0.0, 1.0);
    }
  }
  return img;
}

std::string make_id(const char* prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << '_';
  os.width(5);
  os.fill('0');
  os << i;
  return os.str();
}

// Independent stream per split so changing one split's size leaves the
// others untouched.
Rng split_rng(std::uint64_t seed, std::size_t stream) {
  Rng base(seed);
  std::uint64_t s = 0;
  for (std::size_t i = 0; i <= stream; ++i) s = base.next_u64();
  return Rng(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::size_t parse_index(const std::string& text, std::size_t row, const char* what) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
    throw FormatError("manifest row " + std::to_string(row) + ": bad " + what + " '" + text + "'", row);
  }
  return static_cast<std::size_t>(std::stoull(text));
}

}  // namespace

const char* split_tag(Split split) {
  switch (split) {
    case Split::fer_train: return "fer-train";
    case Split::fer_eval: return "fer-eval";
    case Split::fr: return "fr";
    case Split::compound: return "compound";
  }
  return "";
}

Split parse_split(const std::string& tag) {
  for (Split s : {Split::fer_train, Split::fer_eval, Split::fr, Split::compound}) {
    if (tag == split_tag(s)) return s;
  }
  throw InvalidInput("unknown split '" + tag + "'");
}

void DatasetManifest::validate() const {
  if (class_names.size() < 2) throw DataError("manifest: need at least two classes");
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (!ids.insert(e.id).second) throw DataError("manifest: duplicate id " + e.id);
    if (e.label && *e.label >= class_count()) throw DataError("manifest: label out of range for " + e.id);
    if (e.split == Split::compound) {
      if (!e.constituents) throw DataError("manifest: compound entry without constituents: " + e.id);
      const auto [c1, c2] = *e.constituents;
      if (c1 == c2 || c1 >= class_count() || c2 >= class_count()) {
        throw DataError("manifest: compound entry needs two distinct valid classes: " + e.id);
      }
    } else if (e.constituents) {
      throw DataError("manifest: constituents on non-compound entry " + e.id);
    }
    if ((e.split == Split::fer_train || e.split == Split::fer_eval) && !e.label) {
      throw DataError("manifest: labeled split entry without label: " + e.id);
    }
  }
}

std::vector<LabeledSample> Dataset::samples(Split split) const {
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (e.split == split) out.push_back({e.id, images[i], e.label});
  }
  return out;
}

std::vector<ClassPair> Dataset::constituents(Split split) const {
  std::vector<ClassPair> out;
  for (const auto& e : manifest.entries) {
    if (e.split == split) out.push_back(e.constituents.value_or(ClassPair{0, 0}));
  }
  return out;
}

std::size_t Dataset::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(manifest.entries.begin(), manifest.entries.end(),
                                                [split](const ManifestEntry& e) { return e.split == split; }));
}

std::vector<std::string> default_class_names(std::size_t classes) {
  static const std::vector<std::string> seven = {"neutral", "happiness", "surprise", "sadness",
                                                 "anger",   "disgust",   "fear"};
  if (classes == seven.size()) return seven;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < classes; ++k) names.push_back("class" + std::to_string(k));
  return names;
}

ImageTensor class_prototype(const ToyGenConfig& config, std::size_t upper_class, std::size_t lower_class) {
  validate_shape(config);
  if (upper_class >= config.classes || lower_class >= config.classes) {
    throw InvalidInput("class index out of range");
  }
  const std::size_t split = config.height / 2;
  ImageTensor img(config.height, config.width);
  for (std::size_t r = 0; r < config.height; ++r) {
    const bool upper = r < split;
    const std::size_t half_rows = upper ? split : config.height - split;
    const std::size_t local = upper ? r : r - split;
    const std::size_t block_row = local * 4 / half_rows;
    const std::uint8_t code = upper ? upper_code(upper_class) : lower_code(lower_class);
    for (std::size_t c = 0; c < config.width; ++c) {
      const std::size_t quarter = c * 4 / config.width;
      img.at(r, c) = pattern_value(code, block_row, quarter == 1 || quarter == 2 ? 1 : 0);
    }
  }
  return img;
}

std::vector<std::size_t> class_counts(const ToyGenConfig& config) {
  if (!(config.imbalance > 0.0 && config.imbalance <= 1.0)) throw InvalidInput("imbalance must be in (0, 1]");
  if (config.n_train < config.classes) throw InvalidInput("n_train must be at least the class count");
  // One guaranteed sample per class, the rest shared by geometric weight.
  std::vector<double> weights(config.classes);
  for (std::size_t k = 0; k < config.classes; ++k) weights[k] = std::pow(config.imbalance, static_cast<double>(k));
  const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  const std::size_t spare = config.n_train - config.classes;
  std::vector<std::size_t> counts(config.classes, 1);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < config.classes; ++k) {
    const auto extra = static_cast<std::size_t>(std::floor(static_cast<double>(spare) * weights[k] / total_weight));
    counts[k] += extra;
    assigned += extra;
  }
  for (std::size_t k = 0; assigned < spare; k = (k + 1) % config.classes, ++assigned) counts[k] += 1;
  return counts;
}

Dataset generate_toy_dataset(const ToyGenConfig& config) {
  validate_shape(config);
  const auto counts = class_counts(config);
  Dataset data;
  data.manifest.class_names = default_class_names(config.classes);

  auto add = [&](Split split, const char* prefix, std::size_t i, std::size_t k, Rng& rng) {
    ManifestEntry e;
    e.id = make_id(prefix, i);
    e.path = "images/" + e.id + ".pgm";
    e.split = split;
    if (split != Split::fr) e.label = k;
    data.manifest.entries.push_back(std::move(e));
    data.images.push_back(noisy_sample(config, k, k, rng));
  };

  Rng train_rng = split_rng(config.seed, 0);
  std::size_t id = 0;
  for (std::size_t k = 0; k < config.classes; ++k) {
    for (std::size_t j = 0; j < counts[k]; ++j) add(Split::fer_train, "train", id++, k, train_rng);
  }
  Rng eval_rng = split_rng(config.seed, 1);
  for (std::size_t i = 0; i < config.n_eval; ++i) add(Split::fer_eval, "eval", i, i % config.classes, eval_rng);
  Rng fr_rng = split_rng(config.seed, 2);
  for (std::size_t i = 0; i < config.n_fr; ++i) add(Split::fr, "fr", i, i % config.classes, fr_rng);
  return data;
}

std::vector<ClassPair> default_compound_pairs() {
  // neutral=0 happiness=1 surprise=2 sadness=3 anger=4 disgust=5 fear=6
  return {{1, 2}, {1, 5}, {3, 6}, {3, 4}, {3, 2}, {3, 5}, {6, 4}, {6, 2}, {4, 2}, {4, 5}, {5, 2}};
}

namespace {

Dataset compound_from_counts(const ToyGenConfig& config, const std::vector<ClassPair>& pairs,
                             const std::vector<std::size_t>& per_pair) {
  validate_shape(config);
  for (const auto& [c1, c2] : pairs) {
    if (c1 == c2) throw InvalidInput("compound pair needs two distinct classes");
    if (c1 >= config.classes || c2 >= config.classes) throw InvalidInput("compound pair class out of range");
  }
  Dataset data;
  data.manifest.class_names = default_class_names(config.classes);
  Rng rng = split_rng(config.seed, 3);
  std::size_t id = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (std::size_t j = 0; j < per_pair[p]; ++j) {
      ManifestEntry e;
      e.id = make_id("cmp", id++);
      e.path = "images/" + e.id + ".pgm";
      e.split = Split::compound;
      e.constituents = pairs[p];
      data.manifest.entries.push_back(std::move(e));
      data.images.push_back(noisy_sample(config, pairs[p].first, pairs[p].second, rng));
    }
  }
  return data;
}

}  // namespace

Dataset generate_compound_set(const ToyGenConfig& config, const std::vector<ClassPair>& pairs,
                              std::size_t n_per_pair) {
  return compound_from_counts(config, pairs, std::vector<std::size_t>(pairs.size(), n_per_pair));
}

Dataset generate_compound_set_total(const ToyGenConfig& config, const std::vector<ClassPair>& pairs,
                                    std::size_t total) {
  if (pairs.empty()) throw InvalidInput("no compound pairs given");
  std::vector<std::size_t> per_pair(pairs.size(), total / pairs.size());
  for (std::size_t p = 0; p < total % pairs.size(); ++p) per_pair[p] += 1;
  return compound_from_counts(config, pairs, per_pair);
}

void merge_into(Dataset& a, Dataset&& b) {
  if (a.manifest.class_names.empty()) a.manifest.class_names = b.manifest.class_names;
  if (a.manifest.class_names != b.manifest.class_names) throw InvalidInput("merge: class lists differ");
  for (std::size_t i = 0; i < b.images.size(); ++i) {
    a.manifest.entries.push_back(std::move(b.manifest.entries[i]));
    a.images.push_back(std::move(b.images[i]));
  }
}

std::string format_manifest_csv(const DatasetManifest& manifest) {
  std::ostringstream os;
  os << "id,path,label,split,c1,c2\n";
  for (const auto& e : manifest.entries) {
    if (e.id.find(',') != std::string::npos || e.path.find(',') != std::string::npos) {
      throw InvalidInput("manifest ids and paths may not contain commas");
    }
    os << e.id << ',' << e.path << ',';
    if (e.label) os << *e.label;
    os << ',' << split_tag(e.split) << ',';
    if (e.constituents) os << e.constituents->first << ',' << e.constituents->second;
    else os << ',';
    os << '\n';
  }
  return os.str();
}

DatasetManifest parse_manifest_csv(const std::string& text, std::vector<std::string> class_names) {
  DatasetManifest manifest;
  manifest.class_names = std::move(class_names);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "id,path,label,split,c1,c2") {
    throw FormatError("manifest: bad header", 1);
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw FormatError("manifest row " + std::to_string(row) + ": expected 6 fields", row);
    ManifestEntry e;
    e.id = f[0];
    e.path = f[1];
    if (!f[2].empty()) e.label = parse_index(f[2], row, "label");
    try {
      e.split = parse_split(f[3]);
    } catch (const InvalidInput&) {
      throw FormatError("manifest row " + std::to_string(row) + ": unknown split '" + f[3] + "'", row);
    }
    if (!f[4].empty() || !f[5].empty()) {
      e.constituents = ClassPair{parse_index(f[4], row, "c1"), parse_index(f[5], row, "c2")};
    }
    manifest.entries.push_back(std::move(e));
  }
  manifest.validate();
  return manifest;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
  data.manifest.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw IoError("cannot create " + (dir / "images").string() + ": " + ec.message());
  {
    std::ofstream out(dir / "classes.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "classes.txt").string());
    for (const auto& name : data.manifest.class_names) out << name << '\n';
  }
  {
    std::ofstream out(dir / "manifest.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "manifest.csv").string());
    out << format_manifest_csv(data.manifest);
  }
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    save_image(dir / data.manifest.entries[i].path, data.images[i]);
  }
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
  const auto classes_path = dir / "classes.txt";
  const auto manifest_path = dir / "manifest.csv";
  std::ifstream classes(classes_path);
  if (!classes) throw IoError("cannot open " + classes_path.string());
  std::vector<std::string> names;
  for (std::string line; std::getline(classes, line);) {
    if (!line.empty()) names.push_back(line);
  }
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_manifest_csv(buf.str(), std::move(names));
  } catch (const FormatError& e) {
    throw FormatError(manifest_path.string() + ": " + e.what(), e.offset());
  } catch (const DataError& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset data;
  data.manifest = read_manifest(dir);
  data.images.reserve(data.manifest.entries.size());
  for (const auto& e : data.manifest.entries) data.images.push_back(load_image(dir / e.path));
  return data;
}

}  // namespace rankcal
