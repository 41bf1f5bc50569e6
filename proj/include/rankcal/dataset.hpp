#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rankcal/image.hpp"

namespace rankcal {

using ClassPair = std::pair<std::size_t, std::size_t>;

struct LabeledSample {
  std::string id;
  ImageTensor image;
  std::optional<std::size_t> label;  // empty for the unlabeled split
};

enum class Split { fer_train, fer_eval, fr, compound };

const char* split_tag(Split split);
Split parse_split(const std::string& tag);  // throws InvalidInput

struct ManifestEntry {
  std::string id;
  std::string path;  // relative to the dataset directory
  std::optional<std::size_t> label;
  Split split = Split::fer_train;
  std::optional<ClassPair> constituents;  // compound entries only
};

struct DatasetManifest {
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;

  std::size_t class_count() const noexcept { return class_names.size(); }
  // Unique ids, labels in range, compound entries with two distinct classes.
  void validate() const;
};

// Manifest plus decoded images; images[i] belongs to manifest.entries[i].
struct Dataset {
  DatasetManifest manifest;
  std::vector<ImageTensor> images;

  std::vector<LabeledSample> samples(Split split) const;
  std::vector<ClassPair> constituents(Split split) const;
  std::size_t count(Split split) const;
};

struct ToyGenConfig {
  std::size_t classes = 7;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t n_train = 700;
  std::size_t n_eval = 350;
  std::size_t n_fr = 300;
  double sigma = 0.05;
  // Per-class training counts follow imbalance^k; 1 keeps classes balanced.
  double imbalance = 1.0;
  std::uint64_t seed = 1;
};

inline constexpr std::size_t kMaxToyClasses = 14;
inline constexpr double kPatternLow = 0.2;
inline constexpr double kPatternHigh = 0.8;

std::vector<std::string> default_class_names(std::size_t classes);

// Noise-free class prototype: upper half carries the class's upper signature,
// lower half its lower signature. The upper split is floor(H/2) rows.
ImageTensor class_prototype(const ToyGenConfig& config, std::size_t upper_class, std::size_t lower_class);
inline ImageTensor class_prototype(const ToyGenConfig& config, std::size_t k) {
  return class_prototype(config, k, k);
}

// Training counts per class after applying the imbalance knob.
std::vector<std::size_t> class_counts(const ToyGenConfig& config);

// fer-train, fer-eval and fr splits. The fr split is generated like the
// labeled splits but its labels are dropped.
Dataset generate_toy_dataset(const ToyGenConfig& config);

// The eleven compound pairs (upper class, lower class) for the seven-class
// layout: happily surprised, happily disgusted, sadly fearful, sadly angry,
// sadly surprised, sadly disgusted, fearfully angry, fearfully surprised,
// angrily surprised, angrily disgusted, disgustedly surprised.
std::vector<ClassPair> default_compound_pairs();

Dataset generate_compound_set(const ToyGenConfig& config, const std::vector<ClassPair>& pairs,
                              std::size_t n_per_pair);
// `total` samples spread over the pairs, earlier pairs taking the remainder.
Dataset generate_compound_set_total(const ToyGenConfig& config, const std::vector<ClassPair>& pairs,
                                    std::size_t total);

// Appends b's entries and images to a; class lists must match.
void merge_into(Dataset& a, Dataset&& b);

// Layout: <dir>/classes.txt, <dir>/manifest.csv, <dir>/images/<id>.pgm
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
DatasetManifest read_manifest(const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

std::string format_manifest_csv(const DatasetManifest& manifest);
DatasetManifest parse_manifest_csv(const std::string& text, std::vector<std::string> class_names);

}  // namespace rankcal
