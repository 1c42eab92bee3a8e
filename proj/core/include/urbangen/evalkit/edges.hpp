#pragma once

#include <cstdint>
#include <vector>

#include "urbangen/common/image.hpp"

namespace urbangen::evalkit {

class EdgeMap {
 public:
  EdgeMap() = default;
  EdgeMap(int width, int height) : width_(width), height_(height), grid_(static_cast<std::size_t>(width) * height) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return grid_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { grid_[index(x, y)] = v ? 1 : 0; }
  std::size_t count() const;
  bool operator==(const EdgeMap&) const = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }
  int width_ = 0, height_ = 0;
  std::vector<std::uint8_t> grid_;
};

struct CannyParams {
  double low = 50.0;
  double high = 150.0;
};

// 8-bit luma with the BT.601 weights, rounded.
std::vector<std::uint8_t> to_gray(const RgbImage& image);

// Canny on the grayscale image: 3x3 Sobel with replicated borders, L1
// gradient magnitude, non-maximum suppression over four directions and
// 8-connected hysteresis (strong > high, weak > low). On a plateau of equal
// magnitudes across the gradient the pixel on the lower-index side wins, so
// a step edge yields a one-pixel line. Throws Error(kPrecondition) on an
// empty image or low > high.
EdgeMap detect_edges(const RgbImage& image, const CannyParams& params = {});

// |a & b| / |a | b|; 1 when both are empty. Throws Error(kPrecondition) on a
// size mismatch.
double edge_iou(const EdgeMap& a, const EdgeMap& b);

}  // namespace urbangen::evalkit
