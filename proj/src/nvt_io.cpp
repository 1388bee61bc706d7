/* Copyright 2026 The tokscale Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "tokscale/nvt_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "tokscale/error.hpp"

namespace tokscale::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "NVT1 I/O assumes a little-endian host");

constexpr std::array<char, 4> kFloatMagic = {'N', 'V', 'T', '1'};
constexpr std::array<char, 4> kIntMagic = {'N', 'V', 'I', '1'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

void write_header(std::ostream& os, const std::array<char, 4>& magic,
                  std::span<const std::uint64_t> dims) {
  if (dims.size() > 255) throw InvalidArgument("tensor rank exceeds 255");
  os.write(magic.data(), 4);
  const auto rank = static_cast<std::uint8_t>(dims.size());
  os.put(static_cast<char>(rank));
  for (std::uint64_t d : dims) {
    os.write(reinterpret_cast<const char*>(&d), sizeof d);
  }
}

void read_exact(std::istream& is, char* dst, std::size_t n, const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    throw FormatError(std::string("truncated ") + what);
  }
}

std::vector<std::uint64_t> read_header(std::istream& is,
                                       const std::array<char, 4>& magic,
                                       std::uint64_t* count) {
  std::array<char, 4> got{};
  read_exact(is, got.data(), 4, "header");
  if (got != magic) {
    throw FormatError("bad magic: expected " + std::string(magic.data(), 4));
  }
  char rank_byte = 0;
  read_exact(is, &rank_byte, 1, "header");
  const auto rank = static_cast<std::uint8_t>(rank_byte);
  std::vector<std::uint64_t> dims(rank);
  std::uint64_t n = 1;
  for (auto& d : dims) {
    read_exact(is, reinterpret_cast<char*>(&d), sizeof d, "header");
    if (d != 0 && n > kMaxElements / d) {
      throw FormatError("tensor dimensions too large");
    }
    n *= d;
  }
  *count = n;
  return dims;
}

template <typename T>
std::vector<T> read_payload(std::istream& is, std::uint64_t count) {
  // Grow in chunks so a lying header cannot force a huge allocation.
  constexpr std::uint64_t kChunk = std::uint64_t{1} << 20;
  std::vector<T> data;
  for (std::uint64_t done = 0; done < count;) {
    const std::uint64_t n = std::min(kChunk, count - done);
    data.resize(done + n);
    read_exact(is, reinterpret_cast<char*>(data.data() + done), n * sizeof(T),
               "payload");
    done += n;
  }
  return data;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_nvt1(std::ostream& os, std::span<const std::uint64_t> dims,
                std::span<const float> data) {
  write_header(os, kFloatMagic, dims);
  os.write(reinterpret_cast<const char*>(data.data()),
           static_cast<std::streamsize>(data.size_bytes()));
}

RawTensor read_nvt1(std::istream& is) {
  RawTensor raw;
  std::uint64_t n = 0;
  raw.dims = read_header(is, kFloatMagic, &n);
  raw.data = read_payload<float>(is, n);
  return raw;
}

void write_nvi1(std::ostream& os, std::span<const std::uint64_t> dims,
                std::span<const std::int32_t> data) {
  write_header(os, kIntMagic, dims);
  os.write(reinterpret_cast<const char*>(data.data()),
           static_cast<std::streamsize>(data.size_bytes()));
}

RawIntTensor read_nvi1(std::istream& is) {
  RawIntTensor raw;
  std::uint64_t n = 0;
  raw.dims = read_header(is, kIntMagic, &n);
  raw.data = read_payload<std::int32_t>(is, n);
  return raw;
}

void write_feature_map(std::ostream& os, const FeatureMap& m) {
  const std::array<std::uint64_t, 3> dims = {m.height(), m.width(),
                                             m.channels()};
  write_nvt1(os, dims, m.data());
}

FeatureMap feature_map_from_raw(RawTensor raw) {
  if (raw.dims.size() == 2) raw.dims.push_back(1);
  if (raw.dims.size() != 3) {
    throw FormatError("expected a rank-3 (h, w, c) tensor, got rank " +
                      std::to_string(raw.dims.size()));
  }
  return FeatureMap(raw.dims[0], raw.dims[1], raw.dims[2], std::move(raw.data));
}

void save_feature_map(const std::filesystem::path& path, const FeatureMap& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_feature_map(out, m);
  if (!out) throw FormatError("write failed: " + path.string());
}

RawTensor load_nvt1(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_nvt1(in);
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  return feature_map_from_raw(load_nvt1(path));
}

namespace {

// Next whitespace-delimited PPM header token, skipping '#' comments.
std::string ppm_token(std::istream& is) {
  std::string tok;
  int ch = 0;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw FormatError("truncated PPM header");
  return tok;
}

std::size_t ppm_number(std::istream& is) {
  const std::string tok = ppm_token(is);
  if (!std::all_of(tok.begin(), tok.end(),
                   [](char c) { return c >= '0' && c <= '9'; }) ||
      tok.size() > 9) {
    throw FormatError("bad PPM header field '" + tok + "'");
  }
  return std::stoul(tok);
}

}  // namespace

Image read_ppm(std::istream& is) {
  if (ppm_token(is) != "P6") throw FormatError("not a binary PPM (P6)");
  const std::size_t w = ppm_number(is);
  const std::size_t h = ppm_number(is);
  const std::size_t maxval = ppm_number(is);
  if (w == 0 || h == 0 || maxval == 0 || maxval > 255) {
    throw FormatError("unsupported PPM geometry or maxval");
  }
  std::vector<unsigned char> bytes(w * h * 3);
  read_exact(is, reinterpret_cast<char*>(bytes.data()), bytes.size(),
             "payload");
  std::vector<float> data(bytes.size());
  const float scale = 1.0f / static_cast<float>(maxval);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    data[i] = std::min(1.0f, static_cast<float>(bytes[i]) * scale);
  }
  return Image(h, w, 3, std::move(data));
}

void write_ppm(std::ostream& os, const Image& img) {
  os << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  const auto& px = img.pixels();
  for (std::size_t i = 0; i < img.height(); ++i) {
    for (std::size_t j = 0; j < img.width(); ++j) {
      for (std::size_t c = 0; c < 3; ++c) {
        const float v = px.at(i, j, img.channels() == 3 ? c : 0);
        os.put(static_cast<char>(static_cast<unsigned char>(
            std::clamp(std::lround(v * 255.0f), 0L, 255L))));
      }
    }
  }
}

Image load_image(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::array<char, 2> magic{};
  in.read(magic.data(), 2);
  in.clear();
  in.seekg(0);
  if (magic[0] == 'P' && magic[1] == '6') return read_ppm(in);
  return Image(feature_map_from_raw(read_nvt1(in)));
}

}  // namespace tokscale::io
