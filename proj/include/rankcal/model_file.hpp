#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace rankcal {

inline constexpr std::string_view kModelMagic = "ROTM1";

// On-disk classifier: magic "ROTM1", three little-endian uint32 layer sizes
// (input, hidden, classes), then little-endian IEEE-754 float32 weights in
// the order W1 (input x hidden, row-major), b1, W2 (hidden x classes), b2.
struct ModelFile {
  std::uint32_t input = 0;
  std::uint32_t hidden = 0;
  std::uint32_t classes = 0;
  std::vector<float> weights;

  std::size_t expected_weights() const noexcept {
    return std::size_t{input} * hidden + hidden + std::size_t{hidden} * classes + classes;
  }
  bool operator==(const ModelFile&) const = default;
};

std::vector<unsigned char> encode_model(const ModelFile& model);
ModelFile decode_model(std::span<const unsigned char> bytes);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace rankcal
