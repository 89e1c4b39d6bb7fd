#pragma once

#include <cstdint>
#include <vector>

#include "edgeroute/image.hpp"

namespace edgeroute {

/// Thresholds are fractions of the image's maximum gradient magnitude.
struct CannyParams {
  double sigma = 1.4;
  double t_low = 0.1;
  double t_high = 0.3;
};

/// Gaussian blur -> Sobel -> non-maximum suppression along the quantized
/// gradient direction -> double threshold -> 8-connected hysteresis.
/// Colour input is collapsed to luminance first. Throws DegenerateImage when
/// either side is shorter than 3 pixels, InvalidArgument for bad params.
///
/// All stencil sums pair mirror-symmetric taps, so the result is exactly
/// equivariant under horizontal and vertical flips.
EdgeMap canny(const ImageRaster& img, const CannyParams& params = {});

/// Binary closing with a (2r+1)x(2r+1) square; pixels outside the image
/// count as background for dilation and foreground for erosion.
EdgeMap close_edges(const EdgeMap& edges, int radius);

struct Component {
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  std::size_t pixels = 0;

  std::size_t bbox_area() const {
    return static_cast<std::size_t>(max_x - min_x + 1) * static_cast<std::size_t>(max_y - min_y + 1);
  }
};

/// 8-connected components of the set pixels, in raster order of their first
/// pixel.
std::vector<Component> label_components(const EdgeMap& edges);

}  // namespace edgeroute
