#include "allserp/raster.hpp"

#include <png.h>

#include <cstring>

#include "allserp/core_model.hpp"

namespace allserp {

GrayRaster read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;

  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IngestError("unreadable raster " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IngestError("unreadable raster " + path.string() + ": " + msg);
  }

  GrayRaster out(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = luma601(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const GrayRaster& raster) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = PNG_FORMAT_GRAY;

  if (!png_image_write_to_file(&image, path.string().c_str(), 0, raster.pixels.data(), 0,
                               nullptr)) {
    throw std::runtime_error("cannot write raster " + path.string() + ": " + image.message);
  }
}

}  // namespace allserp
