#include "lensrect/image_io.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "lensrect/error.h"

namespace lensrect {
namespace {

std::string Lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string Extension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return "";
  return Lowercase(path.substr(dot + 1));
}

std::vector<unsigned char> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RasterImage DecodePng(const std::vector<unsigned char>& bytes,
                      const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "cannot decode PNG '" + path + "': " + image.message);
  }
  const bool color = image.format & PNG_FORMAT_FLAG_COLOR;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat,
                "cannot decode PNG '" + path + "': " + image.message);
  }
  RasterImage out(static_cast<int>(image.width),
                  static_cast<int>(image.height), channels);
  std::copy(buffer.begin(), buffer.end(), out.samples().begin());
  return out;
}

// Reads the next header token of a PNM file, skipping '#' comments.
bool NextToken(const std::vector<unsigned char>& bytes, std::size_t* pos,
               std::string* token) {
  token->clear();
  while (*pos < bytes.size()) {
    const unsigned char c = bytes[*pos];
    if (c == '#') {
      while (*pos < bytes.size() && bytes[*pos] != '\n') ++*pos;
    } else if (std::isspace(c)) {
      ++*pos;
    } else {
      break;
    }
  }
  while (*pos < bytes.size() && !std::isspace(bytes[*pos])) {
    token->push_back(static_cast<char>(bytes[(*pos)++]));
  }
  return !token->empty();
}

RasterImage DecodePnm(const std::vector<unsigned char>& bytes,
                      const std::string& path) {
  std::size_t pos = 0;
  std::string magic, w, h, maxval;
  if (!NextToken(bytes, &pos, &magic) || !NextToken(bytes, &pos, &w) ||
      !NextToken(bytes, &pos, &h) || !NextToken(bytes, &pos, &maxval)) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "truncated PNM header in '" + path + "'");
  }
  const int channels = magic == "P6" ? 3 : 1;
  int width = 0, height = 0;
  try {
    width = std::stoi(w);
    height = std::stoi(h);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "malformed PNM header in '" + path + "'");
  }
  if (maxval != "255" || width <= 0 || height <= 0) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "only 8-bit PNM files are supported ('" + path + "')");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t needed = std::size_t(width) * height * channels;
  if (bytes.size() < pos + needed) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "truncated PNM data in '" + path + "'");
  }
  RasterImage out(width, height, channels);
  std::copy(bytes.begin() + pos, bytes.begin() + pos + needed,
            out.samples().begin());
  return out;
}

std::vector<std::uint8_t> Quantize(const RasterImage& image) {
  std::vector<std::uint8_t> bytes(image.samples().size());
  std::transform(image.samples().begin(), image.samples().end(),
                 bytes.begin(), QuantizeSample);
  return bytes;
}

void WritePnm(const std::string& path, int width, int height, int channels,
              const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << (channels == 3 ? "P6" : "P5") << "\n"
      << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
}

void WritePng(const std::string& path, int width, int height, int channels,
              const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0,
                               nullptr)) {
    throw Error(ErrorCode::kIo,
                "cannot write PNG '" + path + "': " + image.message);
  }
}

}  // namespace

RasterImage ReadImage(const std::string& path) {
  const std::vector<unsigned char> bytes = ReadFileBytes(path);
  static const unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G',
                                                 '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSignature, kPngSignature + 8,
                                      bytes.begin())) {
    return DecodePng(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' &&
      (bytes[1] == '5' || bytes[1] == '6')) {
    return DecodePnm(bytes, path);
  }
  throw Error(ErrorCode::kUnsupportedFormat,
              "'" + path + "' is neither PNG nor binary PGM/PPM");
}

void WriteImage(const std::string& path, const RasterImage& image) {
  const std::string ext = Extension(path);
  const std::vector<std::uint8_t> bytes = Quantize(image);
  if (ext == "png") {
    WritePng(path, image.width(), image.height(), image.channels(), bytes);
  } else if (ext == "pgm" || ext == "ppm" || ext == "pnm") {
    if ((ext == "pgm" && image.channels() != 1) ||
        (ext == "ppm" && image.channels() != 3)) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  "channel count does not match extension of '" + path + "'");
    }
    WritePnm(path, image.width(), image.height(), image.channels(), bytes);
  } else {
    throw Error(ErrorCode::kUnsupportedFormat,
                "unsupported output extension for '" + path + "'");
  }
}

void WriteMask(const std::string& path, const ValidityMask& mask) {
  std::vector<std::uint8_t> bytes(mask.valid.size());
  std::transform(mask.valid.begin(), mask.valid.end(), bytes.begin(),
                 [](std::uint8_t v) { return v ? 255 : 0; });
  WritePnm(path, mask.width, mask.height, 1, bytes);
}

ValidityMask ReadMask(const std::string& path) {
  const RasterImage img = ReadImage(path);
  if (img.channels() != 1) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "mask '" + path + "' must be single-channel");
  }
  ValidityMask mask(img.width(), img.height(), false);
  for (std::size_t i = 0; i < mask.valid.size(); ++i) {
    mask.valid[i] = img.samples()[i] >= 128.0f ? 1 : 0;
  }
  return mask;
}

std::string MaskPathFor(const std::string& image_path) {
  const auto slash = image_path.find_last_of('/');
  const auto dot = image_path.find_last_of('.');
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash)) {
    return image_path + ".mask.pgm";
  }
  return image_path.substr(0, dot) + ".mask.pgm";
}

}  // namespace lensrect
