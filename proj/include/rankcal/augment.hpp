#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rankcal/dataset.hpp"
#include "rankcal/image.hpp"
#include "rankcal/numcore.hpp"

namespace rankcal {

// Pixel box [x, x + w) x [y, y + h).
struct BlendBox {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t w = 0;
  std::size_t h = 0;
};

// A synthetic sample. Pixels inside the box come from the second parent.
struct BlendRecord {
  ImageTensor image;
  std::vector<double> soft_label;  // lambda * onehot(c1) + (1 - lambda) * onehot(c2)
  std::string parent_a;
  std::string parent_b;
  std::size_t c1 = 0;
  std::size_t c2 = 0;
  double lambda = 0.5;
  BlendBox box;
};

// Reflect-pad by `pad` on every side, then crop a random window of the
// original size. Offsets are drawn even when pad is 0 so the stream advances
// the same way for every configuration.
ImageTensor random_crop_pad(const ImageTensor& img, std::size_t pad, Rng& rng);
ImageTensor crop_padded(const ImageTensor& img, std::size_t pad, std::size_t off_y, std::size_t off_x);

ImageTensor mirror_columns(const ImageTensor& img);
// Mirrors with probability p; always consumes one draw.
ImageTensor horizontal_flip(const ImageTensor& img, Rng& rng, double p = 0.5);

struct WeakAugment {
  std::size_t pad = 2;
  double flip_p = 0.5;
};
ImageTensor weak_augment(const ImageTensor& img, const WeakAugment& aug, Rng& rng);

// CutMix with lambda ~ U(0,1) and a box centre drawn uniformly over the image.
// The label uses the area-corrected lambda after the box is clipped.
BlendRecord cutmix_general(const LabeledSample& a, const LabeledSample& b, std::size_t classes, Rng& rng);
// Same, with lambda and box centre supplied by the caller.
BlendRecord cutmix_at(const LabeledSample& a, const LabeledSample& b, std::size_t classes, double lambda,
                      double center_x, double center_y);

// Upper floor(H/2) rows from a, remaining rows from b, lambda fixed at 0.5.
// Parents must carry different labels.
BlendRecord blend_horizontal(const LabeledSample& a, const LabeledSample& b, std::size_t classes);

}  // namespace rankcal
