#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace allserp {

/// 8-bit single-channel raster, row-major.
struct GrayRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayRaster() = default;
  GrayRaster(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  bool empty() const { return width <= 0 || height <= 0; }
  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::span<const std::uint8_t> row(int y) const {
    return {pixels.data() + static_cast<std::size_t>(y) * width,
            static_cast<std::size_t>(width)};
  }
};

/// ITU-R BT.601 luma, rounded to nearest.
constexpr std::uint8_t luma601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

/// Decodes any 8/16-bit PNG (gray, gray+alpha, RGB, RGBA, palette) to luma.
/// Throws IngestError when the file is missing or not a decodable PNG.
GrayRaster read_png(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG. Output bytes depend only on the pixels.
void write_png(const std::filesystem::path& path, const GrayRaster& raster);

}  // namespace allserp
