#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace maduv {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

/// 8-bit RGB raster, row-major from the top-left corner.
class Image {
 public:
  Image(int width, int height, Rgb background = {255, 255, 255});

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb pixel(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Clipped to the image bounds.
  void fill_rect(int x0, int y0, int x1, int y1, Rgb color);

  /// Encodes as a truecolor PNG (zlib-compressed, deterministic bytes).
  std::vector<std::uint8_t> encode_png() const;
  void write_png(const std::filesystem::path& path) const;

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

}  // namespace maduv
