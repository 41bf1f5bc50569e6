#include "rankcal/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "rankcal/errors.hpp"

namespace rankcal {

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height_ < 2 || width_ < 1) throw InvalidInput("image must be at least 2 rows by 1 column");
  if (pixels_.size() != height_ * width_) throw InvalidInput("image pixel count does not match its shape");
  for (double p : pixels_) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("image pixel outside [0, 1]");
  }
}

ImageTensor::ImageTensor(std::size_t height, std::size_t width, double fill)
    : ImageTensor(height, width, std::vector<double>(height * width, fill)) {}

std::vector<unsigned char> encode_pgm(const ImageTensor& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (double v : img.pixels()) out.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const unsigned char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(ch)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 30)) throw FormatError(std::string("pgm: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("pgm: expected ") + what, start);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::size_t size() const { return bytes_.size(); }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageTensor decode_pgm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("pgm: missing P5 magic", 0);
  HeaderReader reader(bytes);
  reader.advance(2);
  const std::size_t width = reader.read_uint("width");
  const std::size_t height = reader.read_uint("height");
  const std::size_t maxval_at = reader.pos();
  const std::size_t maxval = reader.read_uint("maxval");
  if (maxval != 255) throw FormatError("pgm: maxval must be 255", maxval_at);
  // Exactly one whitespace byte separates the header from the raster.
  if (reader.pos() >= bytes.size() || !std::isspace(bytes[reader.pos()])) {
    throw FormatError("pgm: expected whitespace after maxval", reader.pos());
  }
  reader.advance(1);
  if (height < 2 || width < 1) throw FormatError("pgm: image must be at least 2 rows by 1 column", 0);
  const std::size_t need = width * height;
  if (bytes.size() - reader.pos() < need) {
    throw FormatError("pgm: truncated payload, expected " + std::to_string(need) + " bytes", bytes.size());
  }
  std::vector<double> pixels(need);
  for (std::size_t i = 0; i < need; ++i) pixels[i] = bytes[reader.pos() + i] / 255.0;
  return ImageTensor(height, width, std::move(pixels));
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void save_image(const std::filesystem::path& path, const ImageTensor& img) {
  write_file_bytes(path, encode_pgm(img));
}

ImageTensor load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_pgm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what() + " (byte " + std::to_string(e.offset()) + ")",
                      e.offset());
  }
}

}  // namespace rankcal
