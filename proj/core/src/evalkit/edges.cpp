#include "urbangen/evalkit/edges.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "urbangen/common/error.hpp"
#include "urbangen/common/geometry.hpp"

namespace urbangen::evalkit {

std::size_t EdgeMap::count() const { return static_cast<std::size_t>(std::count(grid_.begin(), grid_.end(), 1)); }

std::vector<std::uint8_t> to_gray(const RgbImage& image) {
  const auto& px = image.bytes();
  std::vector<std::uint8_t> gray(px.size() / 3);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double y = 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2];
    gray[i] = static_cast<std::uint8_t>(std::min(255.0, std::floor(y + 0.5)));
  }
  return gray;
}

EdgeMap detect_edges(const RgbImage& image, const CannyParams& params) {
  if (image.empty()) throw Error(ErrorCode::kPrecondition, "edge detection needs a non-empty image");
  if (params.low > params.high) throw Error(ErrorCode::kPrecondition, "canny low threshold exceeds the high one");
  const int w = image.width(), h = image.height();
  const auto gray = to_gray(image);
  auto g = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return static_cast<int>(gray[static_cast<std::size_t>(y) * w + x]);
  };

  std::vector<int> dx(gray.size()), dy(gray.size()), mag(gray.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int gx = (g(x + 1, y - 1) + 2 * g(x + 1, y) + g(x + 1, y + 1)) -
                     (g(x - 1, y - 1) + 2 * g(x - 1, y) + g(x - 1, y + 1));
      const int gy = (g(x - 1, y + 1) + 2 * g(x, y + 1) + g(x + 1, y + 1)) -
                     (g(x - 1, y - 1) + 2 * g(x, y - 1) + g(x + 1, y - 1));
      const auto i = static_cast<std::size_t>(y) * w + x;
      dx[i] = gx;
      dy[i] = gy;
      mag[i] = std::abs(gx) + std::abs(gy);
    }
  }
  auto m = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    return mag[static_cast<std::size_t>(y) * w + x];
  };

  static const double kTan22 = std::tan(deg2rad(22.5));
  static const double kTan67 = std::tan(deg2rad(67.5));

  // 0 suppressed, 1 weak, 2 strong.
  std::vector<std::uint8_t> cls(gray.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      const int v = mag[i];
      if (!(v > params.low)) continue;
      const double ax = std::abs(dx[i]), ay = std::abs(dy[i]);
      bool keep = false;
      if (ay < ax * kTan22) {
        keep = v > m(x - 1, y) && v >= m(x + 1, y);
      } else if (ay > ax * kTan67) {
        keep = v > m(x, y - 1) && v >= m(x, y + 1);
      } else {
        const int s = (dx[i] < 0) != (dy[i] < 0) ? -1 : 1;
        keep = v > m(x - s, y - 1) && v > m(x + s, y + 1);
      }
      if (keep) cls[i] = v > params.high ? 2 : 1;
    }
  }

  EdgeMap out(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (cls[static_cast<std::size_t>(y) * w + x] != 2 || out.at(x, y)) continue;
      out.set(x, y);
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int oy = -1; oy <= 1; ++oy) {
          for (int ox = -1; ox <= 1; ++ox) {
            const int nx = cx + ox, ny = cy + oy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h || out.at(nx, ny)) continue;
            if (cls[static_cast<std::size_t>(ny) * w + nx] == 0) continue;
            out.set(nx, ny);
            stack.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return out;
}

double edge_iou(const EdgeMap& a, const EdgeMap& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(ErrorCode::kPrecondition, "edge maps differ in size");
  std::size_t inter = 0, uni = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const bool p = a.at(x, y), q = b.at(x, y);
      inter += p && q;
      uni += p || q;
    }
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace urbangen::evalkit
