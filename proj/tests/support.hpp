#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rankcal/numcore.hpp"

namespace rankcal::support {

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi);
// Random distribution with strictly positive entries.
std::vector<double> random_simplex(Rng& rng, std::size_t n);

// Central differences of f at x, one coordinate at a time.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h = 1e-5);

// max_i |a_i - n_i| / max(|a_i|, |n_i|) over coordinates with |a_i| > floor.
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                          double floor = 1e-8);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rankcal::support
