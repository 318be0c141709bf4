/*
 * Copyright 2026 The RPRR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rprr/image_io.h"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "rprr/errors.h"

namespace rprr {

namespace {

bool HasExtension(const std::string& path, const std::string& ext) {
  if (path.size() < ext.size()) return false;
  std::string tail = path.substr(path.size() - ext.size());
  for (char& c : tail) c = static_cast<char>(std::tolower(c));
  return tail == ext;
}

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenOrThrow(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IngestionError("cannot open '" + path + "'");
  return f;
}

// Netpbm header: magic, width, height, maxval, separated by whitespace with
// optional comments; a single whitespace byte precedes the raster.
struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t raster_offset = 0;
};

PnmHeader ParsePnmHeader(const std::string& bytes, const std::string& path) {
  PnmHeader h;
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() &&
           !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    }
    return bytes.substr(start, pos - start);
  };
  try {
    h.magic = next_token();
    h.width = std::stoi(next_token());
    h.height = std::stoi(next_token());
    h.maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw IngestionError("malformed netpbm header in '" + path + "'");
  }
  if (pos >= bytes.size()) {
    throw IngestionError("netpbm file '" + path + "' has no raster");
  }
  h.raster_offset = pos + 1;
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535) {
    throw IngestionError("bad netpbm dimensions in '" + path + "'");
  }
  return h;
}

DepthImage ReadPgm(const std::string& path) {
  const std::string bytes = ReadFileBytes(path);
  const PnmHeader h = ParsePnmHeader(bytes, path);
  if (h.magic != "P5") {
    throw IngestionError("'" + path + "' is not a binary PGM (P5)");
  }
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  const std::size_t bpp = h.maxval > 255 ? 2 : 1;
  if (bytes.size() < h.raster_offset + n * bpp) {
    throw IngestionError("PGM raster truncated in '" + path + "'");
  }
  std::vector<std::uint16_t> samples(n);
  const auto* p =
      reinterpret_cast<const unsigned char*>(bytes.data()) + h.raster_offset;
  for (std::size_t k = 0; k < n; ++k) {
    samples[k] = bpp == 2 ? static_cast<std::uint16_t>((p[2 * k] << 8) |
                                                       p[2 * k + 1])
                          : p[k];
  }
  return DepthImage(h.width, h.height, std::move(samples));
}

void WritePgm(const std::string& path, const DepthImage& image) {
  std::ostringstream out;
  out << "P5\n" << image.width() << " " << image.height() << "\n65535\n";
  std::string raster;
  raster.reserve(image.samples().size() * 2);
  for (std::uint16_t s : image.samples()) {
    raster.push_back(static_cast<char>(s >> 8));
    raster.push_back(static_cast<char>(s & 0xff));
  }
  WriteFileBytes(path, out.str() + raster);
}

ColorImage ReadPpm(const std::string& path) {
  const std::string bytes = ReadFileBytes(path);
  const PnmHeader h = ParsePnmHeader(bytes, path);
  if (h.magic != "P6" || h.maxval > 255) {
    throw IngestionError("'" + path + "' is not an 8-bit binary PPM (P6)");
  }
  const std::size_t n = 3 * static_cast<std::size_t>(h.width) * h.height;
  if (bytes.size() < h.raster_offset + n) {
    throw IngestionError("PPM raster truncated in '" + path + "'");
  }
  std::vector<std::uint8_t> samples(bytes.begin() + h.raster_offset,
                                    bytes.begin() + h.raster_offset + n);
  return ColorImage(h.width, h.height, std::move(samples));
}

void WritePpm(const std::string& path, const ColorImage& image) {
  std::ostringstream out;
  out << "P6\n" << image.width() << " " << image.height() << "\n255\n";
  const auto& s = image.samples();
  WriteFileBytes(path, out.str() + std::string(s.begin(), s.end()));
}

struct PngReadContext {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadContext() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriteContext {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteContext() { png_destroy_write_struct(&png, &info); }
};

// Reads a PNG into rows of `channels` samples of `bit_depth` bits after the
// usual normalizing transforms.
template <typename Sample>
std::vector<Sample> ReadPngRaster(const std::string& path, int channels,
                                  int* width, int* height) {
  FilePtr file = OpenOrThrow(path, "rb");
  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0) {
    throw IngestionError("'" + path + "' is not a PNG file");
  }
  PngReadContext ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
  if (!ctx.png) throw IngestionError("libpng init failed for '" + path + "'");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IngestionError("libpng init failed for '" + path + "'");

  std::vector<Sample> raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(ctx.png))) {
    throw IngestionError("corrupt PNG data in '" + path + "'");
  }
  png_init_io(ctx.png, file.get());
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const int color_type = png_get_color_type(ctx.png, ctx.info);
  const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(ctx.png);
  if constexpr (sizeof(Sample) == 1) {
    if (bit_depth == 16) png_set_strip_16(ctx.png);
    if (channels == 3 && (color_type == PNG_COLOR_TYPE_GRAY ||
                          color_type == PNG_COLOR_TYPE_GRAY_ALPHA)) {
      png_set_gray_to_rgb(ctx.png);
    }
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 16) {
      throw IngestionError("'" + path +
                           "' is not a 16-bit single-channel PNG");
    }
    png_set_swap(ctx.png);
  }
  png_read_update_info(ctx.png, ctx.info);

  *width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  *height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
  if (rowbytes != static_cast<std::size_t>(*width) * channels * sizeof(Sample)) {
    throw IngestionError("unexpected PNG layout in '" + path + "'");
  }
  raster.resize(static_cast<std::size_t>(*width) * *height * channels);
  rows.resize(*height);
  for (int r = 0; r < *height; ++r) {
    rows[r] = reinterpret_cast<png_bytep>(raster.data() +
                                          static_cast<std::size_t>(r) *
                                              *width * channels);
  }
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return raster;
}

template <typename Sample>
void WritePngRaster(const std::string& path, const Sample* data, int width,
                    int height, int channels) {
  FilePtr file = OpenOrThrow(path, "wb");
  PngWriteContext ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
  if (!ctx.png) throw IngestionError("libpng init failed for '" + path + "'");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IngestionError("libpng init failed for '" + path + "'");
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(ctx.png))) {
    throw IngestionError("failed writing PNG '" + path + "'");
  }
  png_init_io(ctx.png, file.get());
  png_set_IHDR(ctx.png, ctx.info, width, height, 8 * sizeof(Sample),
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  if constexpr (sizeof(Sample) == 2) png_set_swap(ctx.png);
  for (int r = 0; r < height; ++r) {
    rows[r] = reinterpret_cast<png_bytep>(
        const_cast<Sample*>(data + static_cast<std::size_t>(r) * width *
                                       channels));
  }
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

}  // namespace

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileBytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IngestionError("short write to '" + path + "'");
}

DepthImage ReadDepthImage(const std::string& path) {
  if (HasExtension(path, ".png")) {
    int w = 0, h = 0;
    auto raster = ReadPngRaster<std::uint16_t>(path, 1, &w, &h);
    return DepthImage(w, h, std::move(raster));
  }
  if (HasExtension(path, ".pgm")) return ReadPgm(path);
  throw IngestionError("unsupported depth image format: '" + path + "'");
}

void WriteDepthImage(const std::string& path, const DepthImage& image) {
  if (HasExtension(path, ".png")) {
    WritePngRaster(path, image.samples().data(), image.width(), image.height(),
                   1);
  } else if (HasExtension(path, ".pgm")) {
    WritePgm(path, image);
  } else {
    throw IngestionError("unsupported depth image format: '" + path + "'");
  }
}

ColorImage ReadColorImage(const std::string& path) {
  if (HasExtension(path, ".png")) {
    int w = 0, h = 0;
    auto raster = ReadPngRaster<std::uint8_t>(path, 3, &w, &h);
    return ColorImage(w, h, std::move(raster));
  }
  if (HasExtension(path, ".ppm")) return ReadPpm(path);
  throw IngestionError("unsupported color image format: '" + path + "'");
}

void WriteColorImage(const std::string& path, const ColorImage& image) {
  if (HasExtension(path, ".png")) {
    WritePngRaster(path, image.samples().data(), image.width(), image.height(),
                   3);
  } else if (HasExtension(path, ".ppm")) {
    WritePpm(path, image);
  } else {
    throw IngestionError("unsupported color image format: '" + path + "'");
  }
}

std::map<std::string, std::string> ParseKeyValueText(
    const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IngestionError(origin + ":" + std::to_string(line_no) +
                           ": expected key=value");
    }
    out[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> ReadKeyValueFile(const std::string& path) {
  return ParseKeyValueText(ReadFileBytes(path), path);
}

Intrinsics ReadIntrinsicsFile(const std::string& path) {
  const auto kv = ReadKeyValueFile(path);
  auto number = [&](const std::string& key) -> double {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw IngestionError("'" + path + "' is missing key '" + key + "'");
    }
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw IngestionError("'" + path + "': bad value for '" + key + "'");
    }
  };
  Intrinsics k;
  k.fx = number("fx");
  k.fy = number("fy");
  k.ic = number("ic");
  k.jc = number("jc");
  k.width = static_cast<int>(number("width"));
  k.height = static_cast<int>(number("height"));
  if (kv.count("depth_scale")) k.depth_scale = number("depth_scale");
  try {
    k.Validate();
  } catch (const ValidationError& e) {
    throw IngestionError("'" + path + "': " + e.what());
  }
  return k;
}

void WriteIntrinsicsFile(const std::string& path, const Intrinsics& k) {
  std::ostringstream out;
  out << std::setprecision(17) << "fx = " << k.fx << "\nfy = " << k.fy
      << "\nic = " << k.ic << "\njc = " << k.jc << "\nwidth = " << k.width
      << "\nheight = " << k.height << "\ndepth_scale = " << k.depth_scale
      << "\n";
  WriteFileBytes(path, out.str());
}

}  // namespace rprr
