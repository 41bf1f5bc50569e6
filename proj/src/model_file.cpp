#include "rankcal/model_file.hpp"

#include <bit>
#include <string>

#include "rankcal/errors.hpp"
#include "rankcal/image.hpp"

namespace rankcal {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::span<const unsigned char> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[at + i]} << (8 * i);
  return v;
}

constexpr std::size_t kHeaderBytes = kModelMagic.size() + 3 * 4;

}  // namespace

std::vector<unsigned char> encode_model(const ModelFile& model) {
  if (model.weights.size() != model.expected_weights()) {
    throw InvalidInput("model: weight count does not match declared dimensions");
  }
  std::vector<unsigned char> out(kModelMagic.begin(), kModelMagic.end());
  out.reserve(kHeaderBytes + 4 * model.weights.size());
  put_u32(out, model.input);
  put_u32(out, model.hidden);
  put_u32(out, model.classes);
  for (float w : model.weights) put_u32(out, std::bit_cast<std::uint32_t>(w));
  return out;
}

ModelFile decode_model(std::span<const unsigned char> bytes) {
  if (bytes.size() < kModelMagic.size() ||
      std::string_view(reinterpret_cast<const char*>(bytes.data()), kModelMagic.size()) != kModelMagic) {
    throw VersionError("model: unrecognized magic, expected ROTM1");
  }
  if (bytes.size() < kHeaderBytes) throw FormatError("model: truncated header", bytes.size());
  ModelFile model;
  model.input = get_u32(bytes, 5);
  model.hidden = get_u32(bytes, 9);
  model.classes = get_u32(bytes, 13);
  if (model.input == 0 || model.hidden == 0 || model.classes == 0) {
    throw FormatError("model: zero layer size", kModelMagic.size());
  }
  const std::size_t payload = bytes.size() - kHeaderBytes;
  const std::size_t expected = 4 * model.expected_weights();
  if (payload != expected) {
    throw FormatError("model: payload length " + std::to_string(payload) + " bytes, expected " +
                          std::to_string(expected),
                      bytes.size());
  }
  model.weights.resize(model.expected_weights());
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    model.weights[i] = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i));
  }
  return model;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  write_file_bytes(path, encode_model(model));
}

ModelFile load_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_model(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  }
}

}  // namespace rankcal
