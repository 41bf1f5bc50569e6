#include "rankcal/augment.hpp"

#include <algorithm>
#include <cmath>

#include "rankcal/errors.hpp"

namespace rankcal {

namespace {

// Reflection without repeating the edge pixel (..., 2, 1, | 0, 1, 2, ...).
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

std::vector<double> onehot_mix(std::size_t classes, std::size_t c1, std::size_t c2, double lambda) {
  std::vector<double> y(classes, 0.0);
  y[c1] += lambda;
  y[c2] += 1.0 - lambda;
  return y;
}

void require_labels(const LabeledSample& a, const LabeledSample& b, std::size_t classes) {
  if (!a.label || !b.label) throw InvalidInput("blend parents must both be labeled");
  if (*a.label >= classes || *b.label >= classes) throw InvalidInput("blend parent label out of range");
  if (!a.image.same_shape(b.image)) throw InvalidInput("blend parents differ in shape");
}

}  // namespace

ImageTensor crop_padded(const ImageTensor& img, std::size_t pad, std::size_t off_y, std::size_t off_x) {
  if (off_y > 2 * pad || off_x > 2 * pad) throw InvalidInput("crop offset outside padded canvas");
  ImageTensor out(img.height(), img.width());
  const auto p = static_cast<std::ptrdiff_t>(pad);
  for (std::size_t r = 0; r < img.height(); ++r) {
    const std::size_t sr = reflect(static_cast<std::ptrdiff_t>(r + off_y) - p, img.height());
    for (std::size_t c = 0; c < img.width(); ++c) {
      out.at(r, c) = img(sr, reflect(static_cast<std::ptrdiff_t>(c + off_x) - p, img.width()));
    }
  }
  return out;
}

ImageTensor random_crop_pad(const ImageTensor& img, std::size_t pad, Rng& rng) {
  const std::size_t off_y = rng.uniform_index(2 * pad + 1);
  const std::size_t off_x = rng.uniform_index(2 * pad + 1);
  if (pad == 0) return img;
  return crop_padded(img, pad, off_y, off_x);
}

ImageTensor mirror_columns(const ImageTensor& img) {
  ImageTensor out(img.height(), img.width());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) out.at(r, c) = img(r, img.width() - 1 - c);
  }
  return out;
}

ImageTensor horizontal_flip(const ImageTensor& img, Rng& rng, double p) {
  return rng.uniform01() < p ? mirror_columns(img) : img;
}

ImageTensor weak_augment(const ImageTensor& img, const WeakAugment& aug, Rng& rng) {
  return horizontal_flip(random_crop_pad(img, aug.pad, rng), rng, aug.flip_p);
}

BlendRecord cutmix_at(const LabeledSample& a, const LabeledSample& b, std::size_t classes, double lambda,
                      double center_x, double center_y) {
  require_labels(a, b, classes);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("cutmix lambda outside [0, 1]");
  const auto width = static_cast<double>(a.image.width());
  const auto height = static_cast<double>(a.image.height());
  const double cut = std::sqrt(1.0 - lambda);
  const double bw = width * cut;
  const double bh = height * cut;
  auto clip = [](double v, double hi) { return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, hi)); };
  const std::size_t x0 = clip(center_x - bw / 2.0, width);
  const std::size_t x1 = clip(center_x + bw / 2.0, width);
  const std::size_t y0 = clip(center_y - bh / 2.0, height);
  const std::size_t y1 = clip(center_y + bh / 2.0, height);

  BlendRecord rec;
  rec.box = {x0, y0, x1 - x0, y1 - y0};
  rec.image = a.image;
  for (std::size_t r = y0; r < y1; ++r) {
    for (std::size_t c = x0; c < x1; ++c) rec.image.at(r, c) = b.image(r, c);
  }
  const double area = static_cast<double>(rec.box.w * rec.box.h);
  rec.lambda = 1.0 - area / (width * height);
  rec.c1 = *a.label;
  rec.c2 = *b.label;
  rec.soft_label = onehot_mix(classes, rec.c1, rec.c2, rec.lambda);
  rec.parent_a = a.id;
  rec.parent_b = b.id;
  return rec;
}

BlendRecord cutmix_general(const LabeledSample& a, const LabeledSample& b, std::size_t classes, Rng& rng) {
  require_labels(a, b, classes);
  const double lambda = rng.uniform01();
  const double cx = rng.uniform(0.0, static_cast<double>(a.image.width()));
  const double cy = rng.uniform(0.0, static_cast<double>(a.image.height()));
  return cutmix_at(a, b, classes, lambda, cx, cy);
}

BlendRecord blend_horizontal(const LabeledSample& a, const LabeledSample& b, std::size_t classes) {
  require_labels(a, b, classes);
  if (*a.label == *b.label) throw InvalidInput("horizontal blend needs parents with different labels");
  const std::size_t split = a.image.height() / 2;
  BlendRecord rec;
  rec.image = a.image;
  for (std::size_t r = split; r < a.image.height(); ++r) {
    for (std::size_t c = 0; c < a.image.width(); ++c) rec.image.at(r, c) = b.image(r, c);
  }
  rec.box = {0, split, a.image.width(), a.image.height() - split};
  rec.lambda = 0.5;
  rec.c1 = *a.label;
  rec.c2 = *b.label;
  rec.soft_label = onehot_mix(classes, rec.c1, rec.c2, rec.lambda);
  rec.parent_a = a.id;
  rec.parent_b = b.id;
  return rec;
}

}  // namespace rankcal
