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

// NVT1 tensor files.
//
//   bytes 0-3   magic "NVT1" (4E 56 54 31)
//   byte  4     rank (u8)
//   then        rank x u64 little-endian dimensions
//   then        f32 little-endian payload, row-major
//
// Integer blobs (packed token payloads) use the same header with magic
// "NVI1" and an i32 little-endian payload.

#ifndef TOKSCALE_NVT_IO_HPP_
#define TOKSCALE_NVT_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "tokscale/tensor.hpp"

namespace tokscale::io {

struct RawTensor {
  std::vector<std::uint64_t> dims;
  std::vector<float> data;
};

struct RawIntTensor {
  std::vector<std::uint64_t> dims;
  std::vector<std::int32_t> data;
};

void write_nvt1(std::ostream& os, std::span<const std::uint64_t> dims,
                std::span<const float> data);
RawTensor read_nvt1(std::istream& is);

void write_nvi1(std::ostream& os, std::span<const std::uint64_t> dims,
                std::span<const std::int32_t> data);
RawIntTensor read_nvi1(std::istream& is);

// Rank-3 (h, w, c) view; rank 2 is read as a single-channel map.
void write_feature_map(std::ostream& os, const FeatureMap& m);
FeatureMap feature_map_from_raw(RawTensor raw);

void save_feature_map(const std::filesystem::path& path, const FeatureMap& m);
FeatureMap load_feature_map(const std::filesystem::path& path);
RawTensor load_nvt1(const std::filesystem::path& path);

// Binary PPM (P6, maxval <= 255) to a 3-channel image scaled to [0, 1].
Image read_ppm(std::istream& is);
void write_ppm(std::ostream& os, const Image& img);

// Dispatches on magic: "P6" or "NVT1".
Image load_image(const std::filesystem::path& path);

}  // namespace tokscale::io

#endif  // TOKSCALE_NVT_IO_HPP_
