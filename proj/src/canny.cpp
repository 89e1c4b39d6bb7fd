#include "edgeroute/canny.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "edgeroute/error.hpp"

namespace edgeroute {
namespace {

// tan(22.5 deg): boundary between axis-aligned and diagonal sectors.
constexpr float kTan22_5 = 0.41421356237f;

std::vector<float> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0f};
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(radius + 1);
  double sum = 0.0;
  for (int i = 0; i <= radius; ++i) {
    k[i] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += i == 0 ? k[i] : 2.0 * k[i];
  }
  std::vector<float> out(radius + 1);
  for (int i = 0; i <= radius; ++i) out[i] = static_cast<float>(k[i] / sum);
  return out;
}

// Half-kernel convolution: k[0] * centre + sum_j k[j] * (left_j + right_j).
std::vector<float> blur(const std::vector<float>& src, int w, int h, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size()) - 1;
  if (r == 0) return src;
  std::vector<float> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    const float* row = &src[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      float acc = k[0] * row[x];
      for (int j = 1; j <= r; ++j) {
        acc += k[j] * (row[std::max(x - j, 0)] + row[std::min(x + j, w - 1)]);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = k[0] * tmp[static_cast<std::size_t>(y) * w + x];
      for (int j = 1; j <= r; ++j) {
        acc += k[j] * (tmp[static_cast<std::size_t>(std::max(y - j, 0)) * w + x] +
                       tmp[static_cast<std::size_t>(std::min(y + j, h - 1)) * w + x]);
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

enum class Sector : std::uint8_t { kHorizontal, kVertical, kDiagonalMain, kDiagonalAnti };

}  // namespace

EdgeMap canny(const ImageRaster& img, const CannyParams& params) {
  img.validate();
  if (img.width < 3 || img.height < 3) {
    throw Error(ErrorKind::kDegenerateImage,
                "image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                    " is smaller than 3x3");
  }
  if (!(params.t_low > 0.0 && params.t_low < params.t_high && params.t_high <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "canny thresholds must satisfy 0 < low < high <= 1");
  }
  if (!(params.sigma >= 0.0) || !std::isfinite(params.sigma)) {
    throw Error(ErrorKind::kInvalidArgument, "canny sigma must be >= 0");
  }
  const int w = img.width, h = img.height;
  const auto n = static_cast<std::size_t>(w) * h;
  const auto smooth = blur(to_luminance(img), w, h, params.sigma);
  auto px = [&](int x, int y) { return smooth[static_cast<std::size_t>(y) * w + x]; };

  std::vector<float> mag(n, 0.0f);
  std::vector<Sector> sector(n, Sector::kHorizontal);
  float max_mag = 0.0f;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float right = (px(x + 1, y - 1) + px(x + 1, y + 1)) + 2.0f * px(x + 1, y);
      const float left = (px(x - 1, y - 1) + px(x - 1, y + 1)) + 2.0f * px(x - 1, y);
      const float down = (px(x - 1, y + 1) + px(x + 1, y + 1)) + 2.0f * px(x, y + 1);
      const float up = (px(x - 1, y - 1) + px(x + 1, y - 1)) + 2.0f * px(x, y - 1);
      const float gx = right - left;
      const float gy = down - up;
      const auto i = static_cast<std::size_t>(y) * w + x;
      mag[i] = std::sqrt(gx * gx + gy * gy);
      max_mag = std::max(max_mag, mag[i]);
      const float ax = std::fabs(gx), ay = std::fabs(gy);
      if (ay <= kTan22_5 * ax) {
        sector[i] = Sector::kHorizontal;
      } else if (ax <= kTan22_5 * ay) {
        sector[i] = Sector::kVertical;
      } else {
        sector[i] = (gx > 0) == (gy > 0) ? Sector::kDiagonalMain : Sector::kDiagonalAnti;
      }
    }
  }

  EdgeMap out{w, h, std::vector<std::uint8_t>(n, 0)};
  if (max_mag <= 0.0f) return out;

  const float high = static_cast<float>(params.t_high) * max_mag;
  const float low = static_cast<float>(params.t_low) * max_mag;
  // 0 = suppressed, 1 = weak, 2 = strong
  std::vector<std::uint8_t> cls(n, 0);
  std::deque<std::size_t> frontier;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      const float m = mag[i];
      if (m < low) continue;
      float a = 0, b = 0;
      switch (sector[i]) {
        case Sector::kHorizontal: a = mag[i - 1]; b = mag[i + 1]; break;
        case Sector::kVertical: a = mag[i - w]; b = mag[i + w]; break;
        case Sector::kDiagonalMain: a = mag[i - w - 1]; b = mag[i + w + 1]; break;
        case Sector::kDiagonalAnti: a = mag[i - w + 1]; b = mag[i + w - 1]; break;
      }
      if (m < a || m < b) continue;
      if (m >= high) {
        cls[i] = 2;
        out.mask[i] = 1;
        frontier.push_back(i);
      } else {
        cls[i] = 1;
      }
    }
  }
  while (!frontier.empty()) {
    const auto i = frontier.front();
    frontier.pop_front();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const auto j = static_cast<std::size_t>(ny) * w + nx;
        if (cls[j] == 1 && !out.mask[j]) {
          out.mask[j] = 1;
          frontier.push_back(j);
        }
      }
    }
  }
  return out;
}

EdgeMap close_edges(const EdgeMap& edges, int radius) {
  if (radius <= 0) return edges;
  const int w = edges.width, h = edges.height;
  auto filter = [&](const std::vector<std::uint8_t>& src, bool dilate) {
    const std::uint8_t outside = dilate ? 0 : 1;
    std::vector<std::uint8_t> tmp(src.size()), dst(src.size());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::uint8_t v = dilate ? 0 : 1;
        for (int d = -radius; d <= radius; ++d) {
          const int nx = x + d;
          const std::uint8_t s = (nx < 0 || nx >= w) ? outside : src[static_cast<std::size_t>(y) * w + nx];
          v = dilate ? std::max(v, s) : std::min(v, s);
        }
        tmp[static_cast<std::size_t>(y) * w + x] = v;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::uint8_t v = dilate ? 0 : 1;
        for (int d = -radius; d <= radius; ++d) {
          const int ny = y + d;
          const std::uint8_t s = (ny < 0 || ny >= h) ? outside : tmp[static_cast<std::size_t>(ny) * w + x];
          v = dilate ? std::max(v, s) : std::min(v, s);
        }
        dst[static_cast<std::size_t>(y) * w + x] = v;
      }
    }
    return dst;
  };
  EdgeMap out{w, h, filter(filter(edges.mask, true), false)};
  return out;
}

std::vector<Component> label_components(const EdgeMap& edges) {
  const int w = edges.width, h = edges.height;
  std::vector<std::uint8_t> visited(edges.mask.size(), 0);
  std::vector<Component> out;
  std::vector<std::size_t> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto start = static_cast<std::size_t>(y) * w + x;
      if (!edges.mask[start] || visited[start]) continue;
      Component c{x, y, x, y, 0};
      visited[start] = 1;
      stack.push_back(start);
      while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        const int cx = static_cast<int>(i % w), cy = static_cast<int>(i / w);
        ++c.pixels;
        c.min_x = std::min(c.min_x, cx);
        c.max_x = std::max(c.max_x, cx);
        c.min_y = std::min(c.min_y, cy);
        c.max_y = std::max(c.max_y, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto j = static_cast<std::size_t>(ny) * w + nx;
            if (edges.mask[j] && !visited[j]) {
              visited[j] = 1;
              stack.push_back(j);
            }
          }
        }
      }
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace edgeroute
