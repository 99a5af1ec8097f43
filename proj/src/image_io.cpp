#include "consensus_mesh/image_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "consensus_mesh/errors.h"

namespace consensus {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path);
  return f;
}

std::uint8_t quantize(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

struct PngImage {
  int width = 0, height = 0, channels = 0;
  bool palette = false;
  std::vector<std::uint8_t> pixels;
};

void png_error_fn(png_structp, png_const_charp msg) { throw FormatError(std::string("PNG error: ") + msg); }
void png_warning_fn(png_structp, png_const_charp) {}

// With keep_palette, palette images keep their raw indices.
PngImage read_png(const std::string& path, bool keep_palette) {
  FilePtr f = open_file(path, "rb");
  std::uint8_t sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw FormatError(path + " is not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png_create_info_struct(png);
  PngImage out;
  try {
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    out.palette = color == PNG_COLOR_TYPE_PALETTE && keep_palette;
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE && !keep_palette) png_set_palette_to_rgb(png);
    if (depth < 8) {
      if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_packing(png);
      else
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (!out.palette && png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    const size_t stride = png_get_rowbytes(png, info);
    out.pixels.resize(stride * out.height);
    std::vector<png_bytep> rows(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png_raw(const std::string& path, int width, int height, int color_type, const std::vector<std::uint8_t>& data,
                   const std::vector<png_color>* palette = nullptr) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png_create_info_struct(png);
  try {
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    if (palette) png_set_PLTE(png, info, palette->data(), static_cast<int>(palette->size()));
    png_write_info(png, info);
    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    for (int y = 0; y < height; ++y)
      png_write_row(png, const_cast<png_bytep>(data.data() + static_cast<size_t>(y) * width * channels));
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

// Overlap weights of destination cells on source cells along one axis.
std::vector<std::vector<std::pair<int, double>>> area_weights(int src, int dst) {
  std::vector<std::vector<std::pair<int, double>>> w(dst);
  const double ratio = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double lo = i * ratio, hi = (i + 1) * ratio;
    if (ratio <= 1.0) {
      // Upsampling: linear interpolation between source centers.
      const double c = std::clamp((i + 0.5) * ratio - 0.5, 0.0, src - 1.0);
      const int i0 = static_cast<int>(std::floor(c));
      const int i1 = std::min(i0 + 1, src - 1);
      const double t = c - i0;
      w[i].emplace_back(i0, 1.0 - t);
      if (i1 != i0) w[i].emplace_back(i1, t);
      continue;
    }
    for (int s = static_cast<int>(std::floor(lo)); s < static_cast<int>(std::ceil(hi)) && s < src; ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (overlap > 0.0) w[i].emplace_back(s, overlap / ratio);
    }
  }
  return w;
}

void resample_into(const Grid& src, Grid& dst) {
  const auto wx = area_weights(src.width(), dst.width());
  const auto wy = area_weights(src.height(), dst.height());
  for (int y = 0; y < dst.height(); ++y)
    for (int x = 0; x < dst.width(); ++x)
      for (int c = 0; c < dst.channels(); ++c) {
        double acc = 0.0;
        for (auto [sy, ay] : wy[y])
          for (auto [sx, ax] : wx[x]) acc += ay * ax * src.at(sx, sy, c);
        dst.at(x, y, c) = acc;
      }
}

}  // namespace

void write_png(const std::string& path, const ImageRGB& image) {
  std::vector<std::uint8_t> data(image.data().size());
  for (size_t i = 0; i < data.size(); ++i) data[i] = quantize(image.data()[i]);
  write_png_raw(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, data);
}

void write_png(const std::string& path, const Mask& mask) {
  std::vector<std::uint8_t> data(mask.data().size());
  for (size_t i = 0; i < data.size(); ++i) data[i] = quantize(mask.data()[i]);
  write_png_raw(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, data);
}

ImageRGB read_png_rgb(const std::string& path) {
  PngImage png = read_png(path, false);
  ImageRGB out(png.width, png.height);
  for (int y = 0; y < png.height; ++y)
    for (int x = 0; x < png.width; ++x) {
      const std::uint8_t* px = png.pixels.data() + (static_cast<size_t>(y) * png.width + x) * png.channels;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = (png.channels >= 3 ? px[c] : px[0]) / 255.0;
    }
  return out;
}

Mask read_png_mask(const std::string& path) {
  PngImage png = read_png(path, false);
  Mask out(png.width, png.height);
  for (int y = 0; y < png.height; ++y)
    for (int x = 0; x < png.width; ++x) {
      const std::uint8_t* px = png.pixels.data() + (static_cast<size_t>(y) * png.width + x) * png.channels;
      const double v = png.channels >= 3 ? (px[0] + px[1] + px[2]) / 3.0 : px[0];
      out.at(x, y) = v / 255.0;
    }
  return out;
}

void write_label_png(const std::string& path, const LabelMap& labels) {
  int max_label = 0;
  std::vector<std::uint8_t> data(labels.labels.size());
  for (size_t i = 0; i < data.size(); ++i) {
    const int l = labels.labels[i];
    if (l < 0 || l > 255) throw InvalidArgument("label PNG holds labels 0..255 only");
    data[i] = static_cast<std::uint8_t>(l);
    max_label = std::max(max_label, l);
  }
  std::vector<png_color> palette(std::max(2, max_label + 1));
  for (size_t i = 0; i < palette.size(); ++i) {
    if (i == 0) {
      palette[i] = {0, 0, 0};
      continue;
    }
    // Spread hues so neighboring ids are easy to tell apart.
    const double h = std::fmod(i * 0.618033988749895, 1.0) * 6.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
      case 0: r = 1, g = x; break;
      case 1: r = x, g = 1; break;
      case 2: g = 1, b = x; break;
      case 3: g = x, b = 1; break;
      case 4: r = x, b = 1; break;
      default: r = 1, b = x; break;
    }
    palette[i] = {quantize(0.2 + 0.8 * r), quantize(0.2 + 0.8 * g), quantize(0.2 + 0.8 * b)};
  }
  write_png_raw(path, labels.width, labels.height, PNG_COLOR_TYPE_PALETTE, data, &palette);
}

LabelMap read_label_png(const std::string& path) {
  PngImage png = read_png(path, true);
  if (!png.palette && png.channels != 1) throw FormatError(path + ": label maps must be palette or grayscale PNG");
  LabelMap out{png.width, png.height, std::vector<int>(static_cast<size_t>(png.width) * png.height)};
  for (size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = png.pixels[i];
  return out;
}

void write_pfm(const std::string& path, const Grid& map) {
  if (map.channels() != 1) throw InvalidArgument("PFM export supports single-channel maps");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path);
  os << "Pf\n" << map.width() << " " << map.height() << "\n-1.0\n";
  std::vector<float> row(map.width());
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) row[x] = static_cast<float>(map.at(x, y));
    for (float v : row) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                       static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
      os.write(bytes, 4);
    }
  }
  if (!os) throw IoError("failed writing " + path);
}

Grid read_pfm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  is >> magic >> width >> height >> scale;
  if (magic != "Pf" || width <= 0 || height <= 0 || scale == 0.0 || !is) throw FormatError(path + " is not a grayscale PFM");
  is.get();
  const bool little = scale < 0.0;
  Grid out(width, height, 1);
  for (int y = height - 1; y >= 0; --y)
    for (int x = 0; x < width; ++x) {
      unsigned char b[4];
      if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError(path + ": truncated PFM data");
      std::uint32_t bits = little ? (b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24))
                                  : (b[3] | (b[2] << 8) | (b[1] << 16) | (std::uint32_t(b[0]) << 24));
      float v;
      std::memcpy(&v, &bits, 4);
      out.at(x, y) = v;
    }
  return out;
}

ImageRGB resample(const ImageRGB& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  ImageRGB out(width, height);
  resample_into(src, out);
  return out;
}

Mask resample(const Mask& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  Mask out(width, height);
  resample_into(src, out);
  return out;
}

}  // namespace consensus
