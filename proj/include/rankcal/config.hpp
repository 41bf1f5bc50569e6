#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "rankcal/losses.hpp"
#include "rankcal/pseudolabel.hpp"

namespace rankcal {

// Which parents a synthetic blend draws from. The upper half always comes
// from a FER training sample.
enum class Pairing { fer_fr, fer_fer, both };

struct TrainConfig {
  double lr = 5e-4;
  std::size_t batch = 64;
  std::size_t epochs = 60;
  double delta = 0.2;
  double w_rank = 1.0;
  FocalConfig focal;
  PseudoLabelConfig pseudo;
  Pairing pairing = Pairing::fer_fr;
  std::uint64_t seed = 1;
  std::size_t bins = 15;
  std::size_t hidden_dim = 64;
  RankMode rank_mode = RankMode::label_indexed;
  bool syn_focal = true;
  bool fr_focal = true;
  // Weak augmentation on FER classification samples.
  bool augment_fer = true;
  // FR samples drawn per step, as a multiple of the FER batch size.
  std::size_t fr_ratio = 1;

  void validate() const;
};

// `key = value` lines; '#' starts a comment. Unknown keys throw InvalidInput.
TrainConfig parse_config(const std::string& text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});
void apply_setting(TrainConfig& config, const std::string& key, const std::string& value);

// Every key with its effective value, in a form parse_config accepts.
std::string format_config(const TrainConfig& config);

const char* pairing_tag(Pairing pairing);
const char* rank_mode_tag(RankMode mode);

}  // namespace rankcal
