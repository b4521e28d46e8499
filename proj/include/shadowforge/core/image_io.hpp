/* Copyright 2026 The ShadowForge Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */
#pragma once

// 8-bit grayscale image files: binary portable graymap (P5) and PNG.
// Values are stored as round(255 * clamp(v, 0, 1)).

#include <png.h>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shadowforge/core/error.hpp"
#include "shadowforge/core/image.hpp"

namespace shadowforge {

inline std::vector<unsigned char> quantize(const Image& img) {
  std::vector<unsigned char> bytes(img.size());
  std::transform(img.data.begin(), img.data.end(), bytes.begin(), to_byte);
  return bytes;
}

inline Image dequantize(int w, int h, const unsigned char* bytes) {
  Image img(w, h);
  for (size_t i = 0; i < img.size(); ++i) img.data[i] = bytes[i] / 255.0;
  return img;
}

inline std::string encode_pgm(const Image& img) {
  std::ostringstream os;
  os << "P5\n" << img.width << " " << img.height << "\n255\n";
  const auto bytes = quantize(img);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  return os.str();
}

inline Image decode_pgm(const std::string& buf) {
  size_t pos = 0;
  auto next_token = [&]() {
    while (pos < buf.size()) {
      if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    return buf.substr(start, pos - start);
  };
  if (next_token() != "P5") throw AssetError("not a binary PGM (P5) image");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw AssetError("malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw AssetError("unsupported PGM header (need 8-bit, maxval 255)");
  ++pos;  // single whitespace after maxval
  if (buf.size() < pos + static_cast<size_t>(w) * h) throw AssetError("truncated PGM data");
  return dequantize(w, h, reinterpret_cast<const unsigned char*>(buf.data() + pos));
}

inline std::string encode_png(const Image& img) {
  png_image pimg{};
  pimg.version = PNG_IMAGE_VERSION;
  pimg.width = static_cast<png_uint_32>(img.width);
  pimg.height = static_cast<png_uint_32>(img.height);
  pimg.format = PNG_FORMAT_GRAY;
  const auto bytes = quantize(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&pimg, nullptr, &size, 0, bytes.data(), 0, nullptr))
    throw Error(std::string("png encode failed: ") + pimg.message);
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&pimg, out.data(), &size, 0, bytes.data(), 0, nullptr))
    throw Error(std::string("png encode failed: ") + pimg.message);
  out.resize(size);
  return out;
}

inline Image decode_png(const std::string& buf) {
  png_image pimg{};
  pimg.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&pimg, buf.data(), buf.size()))
    throw AssetError(std::string("png decode failed: ") + pimg.message);
  pimg.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> bytes(PNG_IMAGE_SIZE(pimg));
  if (!png_image_finish_read(&pimg, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&pimg);
    throw AssetError(std::string("png decode failed: ") + pimg.message);
  }
  return dequantize(static_cast<int>(pimg.width), static_cast<int>(pimg.height), bytes.data());
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AssetError("asset not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline bool has_png_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

// Format chosen by extension: .png, otherwise P5 graymap.
inline Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() >= 8 && static_cast<unsigned char>(bytes[0]) == 0x89 && bytes[1] == 'P') return decode_png(bytes);
  return decode_pgm(bytes);
}

inline void write_image(const std::filesystem::path& path, const Image& img) {
  write_file_bytes(path, has_png_extension(path) ? encode_png(img) : encode_pgm(img));
}

}  // namespace shadowforge
