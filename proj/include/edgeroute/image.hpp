#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edgeroute {

/// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
struct ImageRaster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  ImageRaster() = default;
  /// Allocates and fills every channel with `fill`.
  ImageRaster(int width, int height, int channels, std::uint8_t fill = 0);

  /// Throws InvalidArgument when dimensions and buffer disagree.
  void validate() const;

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Binary per-pixel edge indicator (0 or 1).
struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;

  bool at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t edge_pixels() const;
};

/// Luminance as float, Rec. 601 weights for RGB input.
std::vector<float> to_luminance(const ImageRaster& img);

/// Binary PGM (P5) or PPM (P6), maxval <= 255.
ImageRaster decode_pnm(std::span<const std::uint8_t> bytes);
ImageRaster read_pnm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pnm(const ImageRaster& img);
void write_pnm(const std::filesystem::path& path, const ImageRaster& img);

ImageRaster mirror_horizontal(const ImageRaster& img);
ImageRaster mirror_vertical(const ImageRaster& img);

}  // namespace edgeroute
