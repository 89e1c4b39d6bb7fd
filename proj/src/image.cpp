#include "edgeroute/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <numeric>

#include "edgeroute/error.hpp"

namespace edgeroute {

ImageRaster::ImageRaster(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c) {
  if (w < 1 || h < 1 || (c != 1 && c != 3)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid raster dimensions");
  }
  pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
}

void ImageRaster::validate() const {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::kInvalidArgument, "raster width and height must be >= 1");
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorKind::kInvalidArgument, "raster must have 1 or 3 channels");
  }
  if (pixels.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorKind::kInvalidArgument, "raster buffer length does not match dimensions");
  }
}

std::size_t EdgeMap::edge_pixels() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<float> to_luminance(const ImageRaster& img) {
  img.validate();
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  std::vector<float> out(n);
  if (img.channels == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = img.pixels[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto* p = &img.pixels[i * 3];
      out[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
  }
  return out;
}

namespace {

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorKind::kInvalidArgument, "malformed PNM header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > (1 << 24)) throw Error(ErrorKind::kInvalidArgument, "PNM dimension too large");
    }
    return static_cast<int>(value);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageRaster decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorKind::kInvalidArgument, "not a binary PGM/PPM (P5/P6) image");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  PnmReader reader(bytes);
  reader.advance(2);
  const int width = reader.next_int();
  const int height = reader.next_int();
  const int maxval = reader.next_int();
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
    throw Error(ErrorKind::kInvalidArgument, "unsupported PNM dimensions or maxval");
  }
  // Exactly one whitespace byte separates the header from the raster.
  reader.advance(1);
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() < reader.pos() + need) {
    throw Error(ErrorKind::kInvalidArgument, "truncated PNM raster");
  }
  ImageRaster img(width, height, channels);
  auto first = bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos());
  std::copy(first, first + static_cast<std::ptrdiff_t>(need), img.pixels.begin());
  if (maxval != 255) {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::min(255, p * 255 / maxval));
  }
  return img;
}

ImageRaster read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_pnm(bytes);
}

std::vector<std::uint8_t> encode_pnm(const ImageRaster& img) {
  img.validate();
  std::string header = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) +
                       " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

void write_pnm(const std::filesystem::path& path, const ImageRaster& img) {
  auto bytes = encode_pnm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write image " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

ImageRaster mirror_horizontal(const ImageRaster& img) {
  ImageRaster out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
    }
  }
  return out;
}

ImageRaster mirror_vertical(const ImageRaster& img) {
  ImageRaster out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x, img.height - 1 - y, c);
    }
  }
  return out;
}

}  // namespace edgeroute
