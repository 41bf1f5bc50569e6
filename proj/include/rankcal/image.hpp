#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rankcal {

// Grayscale image with pixels in [0, 1], row-major.
class ImageTensor {
 public:
  ImageTensor() = default;
  // Throws InvalidInput if height < 2, width < 1 or a pixel lies outside [0, 1].
  ImageTensor(std::size_t height, std::size_t width, std::vector<double> pixels);
  ImageTensor(std::size_t height, std::size_t width, double fill = 0.0);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  double operator()(std::size_t r, std::size_t c) const { return pixels_[r * width_ + c]; }
  // Unchecked write; callers keep values in [0, 1].
  double& at(std::size_t r, std::size_t c) { return pixels_[r * width_ + c]; }

  std::span<const double> pixels() const noexcept { return pixels_; }

  bool same_shape(const ImageTensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool operator==(const ImageTensor&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> pixels_;
};

// Binary PGM (P5, maxval 255). Each pixel is stored as round(value * 255).
std::vector<unsigned char> encode_pgm(const ImageTensor& img);
ImageTensor decode_pgm(std::span<const unsigned char> bytes);

void save_image(const std::filesystem::path& path, const ImageTensor& img);
ImageTensor load_image(const std::filesystem::path& path);

// Whole-file helpers shared by the binary formats.
std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace rankcal
