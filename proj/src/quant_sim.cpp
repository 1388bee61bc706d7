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

#include "tokscale/quant_sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "tokscale/error.hpp"

namespace tokscale {

unsigned QuantSpec::bits() const {
  switch (format) {
    case QuantFormat::kInt8Symmetric: return 8;
    case QuantFormat::kInt4Group: return 4;
    case QuantFormat::kFp8E4M3: return 8;
  }
  return 0;
}

const char* to_string(QuantFormat f) {
  switch (f) {
    case QuantFormat::kInt8Symmetric: return "int8-symmetric";
    case QuantFormat::kInt4Group: return "int4-group";
    case QuantFormat::kFp8E4M3: return "fp8-e4m3";
  }
  return "unknown";
}

const char* to_string(Granularity g) {
  switch (g) {
    case Granularity::kPerTensor: return "per-tensor";
    case Granularity::kPerChannel: return "per-channel";
    case Granularity::kPerGroup: return "per-group";
  }
  return "unknown";
}

QuantFormat parse_quant_format(const std::string& s) {
  if (s == "int8-symmetric" || s == "int8") return QuantFormat::kInt8Symmetric;
  if (s == "int4-group" || s == "int4") return QuantFormat::kInt4Group;
  if (s == "fp8-e4m3" || s == "fp8") return QuantFormat::kFp8E4M3;
  throw InvalidArgument("unknown quantization format '" + s + "'");
}

Granularity parse_granularity(const std::string& s) {
  if (s == "per-tensor") return Granularity::kPerTensor;
  if (s == "per-channel") return Granularity::kPerChannel;
  if (s == "per-group") return Granularity::kPerGroup;
  throw InvalidArgument("unknown quantization granularity '" + s + "'");
}

namespace fp8 {

bool is_nan_e4m3(std::uint8_t bits) { return (bits & 0x7F) == 0x7F; }

std::uint8_t encode_e4m3(double x) {
  if (std::isnan(x)) throw InvalidArgument("cannot encode NaN as fp8-e4m3");
  const std::uint8_t sign = std::signbit(x) ? 0x80 : 0x00;
  const double a = std::fabs(x);
  if (a >= kMax) return sign | 0x7E;
  if (a < 0x1.0p-6) {
    // Subnormal quantum 2^-9; q == 8 carries into the smallest normal.
    const auto q = static_cast<std::uint8_t>(std::nearbyint(a * 0x1.0p9));
    return sign | q;
  }
  int e = 0;
  std::frexp(a, &e);
  int exponent = e - 1;  // a in [2^exponent, 2^(exponent + 1))
  auto q = static_cast<int>(std::nearbyint(std::ldexp(a, 3 - exponent)));
  if (q == 16) {
    ++exponent;
    q = 8;
  }
  const int biased = exponent + 7;
  if (biased > 15 || (biased == 15 && q - 8 > 6)) return sign | 0x7E;
  return sign | static_cast<std::uint8_t>((biased << 3) | (q - 8));
}

double decode_e4m3(std::uint8_t bits) {
  if (is_nan_e4m3(bits)) throw CorruptTensor("fp8-e4m3 NaN code");
  const int exponent = (bits >> 3) & 0x0F;
  const int mantissa = bits & 0x07;
  const double mag = exponent == 0
                         ? std::ldexp(static_cast<double>(mantissa), -9)
                         : std::ldexp(static_cast<double>(8 + mantissa), exponent - 10);
  return (bits & 0x80) ? -mag : mag;
}

}  // namespace fp8

namespace {

struct Unit {
  std::size_t begin;
  std::size_t end;
};

std::size_t element_count(std::span<const std::size_t> shape) {
  if (shape.empty()) throw InvalidArgument("quantized tensor needs a shape");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw InvalidArgument("quantized tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

// Every granularity partitions the flat buffer into contiguous ranges.
std::vector<Unit> units_for(std::span<const std::size_t> shape,
                            const QuantSpec& spec) {
  const std::size_t n = element_count(shape);
  std::vector<Unit> units;
  switch (spec.granularity) {
    case Granularity::kPerTensor:
      units.push_back({0, n});
      break;
    case Granularity::kPerChannel: {
      const std::size_t inner = n / shape[0];
      for (std::size_t c = 0; c < shape[0]; ++c) {
        units.push_back({c * inner, (c + 1) * inner});
      }
      break;
    }
    case Granularity::kPerGroup: {
      const std::size_t g = spec.group_size;
      const std::size_t row = shape.back();
      if (g == 0) throw InvalidArgument("group size must be positive");
      if (row % g != 0 && !spec.allow_ragged) {
        throw InvalidArgument("group size " + std::to_string(g) +
                              " does not divide the row length " +
                              std::to_string(row) + " (allow_ragged is off)");
      }
      for (std::size_t r = 0; r < n / row; ++r) {
        for (std::size_t b = 0; b < row; b += g) {
          units.push_back({r * row + b, r * row + std::min(row, b + g)});
        }
      }
      break;
    }
  }
  if (spec.format == QuantFormat::kFp8E4M3 &&
      spec.granularity != Granularity::kPerTensor) {
    throw InvalidArgument("fp8-e4m3 is a direct cast; use per-tensor granularity");
  }
  return units;
}

float positive_scale(double s) {
  auto f = static_cast<float>(s);
  if (s > 0.0 && f == 0.0f) f = std::numeric_limits<float>::denorm_min();
  return f;
}

}  // namespace

std::size_t unit_count(std::span<const std::size_t> shape, const QuantSpec& spec) {
  return units_for(shape, spec).size();
}

std::size_t unit_of(std::size_t flat_index, std::span<const std::size_t> shape,
                    const QuantSpec& spec) {
  const std::size_t n = element_count(shape);
  if (flat_index >= n) throw InvalidArgument("element index out of range");
  switch (spec.granularity) {
    case Granularity::kPerTensor: return 0;
    case Granularity::kPerChannel: return flat_index / (n / shape[0]);
    case Granularity::kPerGroup: {
      const std::size_t row = shape.back();
      const std::size_t per_row = (row + spec.group_size - 1) / spec.group_size;
      return (flat_index / row) * per_row + (flat_index % row) / spec.group_size;
    }
  }
  return 0;
}

QuantizedTensor quantize(std::span<const double> values,
                         std::span<const std::size_t> shape,
                         const QuantSpec& spec) {
  const std::vector<Unit> units = units_for(shape, spec);
  if (values.size() != element_count(shape)) {
    throw InvalidArgument("value count does not match the tensor shape");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("cannot quantize non-finite values");
  }

  QuantizedTensor q;
  q.spec = spec;
  q.shape.assign(shape.begin(), shape.end());
  q.codes.resize(values.size());
  q.scales.resize(units.size());

  const auto count = static_cast<std::int64_t>(units.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t ui = 0; ui < count; ++ui) {
    const Unit u = units[static_cast<std::size_t>(ui)];
    const auto vals = values.subspan(u.begin, u.end - u.begin);
    std::int8_t* codes = q.codes.data() + u.begin;
    float& scale = q.scales[static_cast<std::size_t>(ui)];

    if (spec.format == QuantFormat::kFp8E4M3) {
      scale = 1.0f;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        codes[i] = static_cast<std::int8_t>(fp8::encode_e4m3(vals[i]));
      }
      continue;
    }

    int lo = -127, hi = 127;
    if (spec.format == QuantFormat::kInt8Symmetric) {
      double amax = 0.0;
      for (double v : vals) amax = std::max(amax, std::fabs(v));
      scale = positive_scale(amax / 127.0);
    } else {
      lo = -8;
      hi = 7;
      double pos = 0.0, neg = 0.0;
      for (double v : vals) {
        pos = std::max(pos, v);
        neg = std::max(neg, -v);
      }
      scale = positive_scale(std::max(pos / 7.0, neg / 8.0));
    }
    if (scale == 0.0f) {
      std::fill(codes, codes + vals.size(), std::int8_t{0});
      continue;
    }
    const double s = scale;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double c = std::clamp(std::nearbyint(vals[i] / s), static_cast<double>(lo),
                                  static_cast<double>(hi));
      codes[i] = static_cast<std::int8_t>(c);
    }
  }
  return q;
}

QuantizedTensor quantize(const FeatureMap& m, const QuantSpec& spec) {
  const std::vector<double> values(m.data().begin(), m.data().end());
  const std::array<std::size_t, 3> shape = {m.height(), m.width(), m.channels()};
  return quantize(values, shape, spec);
}

std::vector<double> dequantize(const QuantizedTensor& q) {
  const std::vector<Unit> units = units_for(q.shape, q.spec);
  if (q.codes.size() != element_count(q.shape) || q.scales.size() != units.size()) {
    throw CorruptTensor("code or scale count does not match the tensor shape");
  }
  int lo = -127, hi = 127;
  if (q.spec.format == QuantFormat::kInt4Group) {
    lo = -8;
    hi = 7;
  }
  for (float s : q.scales) {
    if (!std::isfinite(s) || s < 0.0f) throw CorruptTensor("invalid scale");
  }
  std::vector<double> out(q.codes.size());
  for (std::size_t ui = 0; ui < units.size(); ++ui) {
    const double s = q.scales[ui];
    for (std::size_t i = units[ui].begin; i < units[ui].end; ++i) {
      if (q.spec.format == QuantFormat::kFp8E4M3) {
        out[i] = fp8::decode_e4m3(static_cast<std::uint8_t>(q.codes[i])) * s;
        continue;
      }
      const int c = q.codes[i];
      if (c < lo || c > hi) {
        throw CorruptTensor("code " + std::to_string(c) + " outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
      out[i] = c * s;
    }
  }
  return out;
}

QuantErrorReport quant_error_report(std::span<const double> values,
                                    std::span<const std::size_t> shape,
                                    const QuantSpec& spec) {
  const QuantizedTensor q = quantize(values, shape, spec);
  const std::vector<double> back = dequantize(q);
  QuantErrorReport r;
  double sq = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = std::fabs(back[i] - values[i]);
    r.max_abs_err = std::max(r.max_abs_err, e);
    sq += e * e;
  }
  r.rmse = std::sqrt(sq / static_cast<double>(values.size()));
  r.units = q.scales.size();
  r.scale_min = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (float s : q.scales) {
    r.scale_min = std::min(r.scale_min, static_cast<double>(s));
    r.scale_max = std::max(r.scale_max, static_cast<double>(s));
    total += s;
    if (s == 0.0f) ++r.zero_units;
  }
  r.scale_mean = total / static_cast<double>(r.units);
  return r;
}

namespace {

constexpr char kQuantMagic[4] = {'N', 'V', 'Q', '1'};

std::vector<std::uint8_t> pack_codes(const QuantizedTensor& q) {
  if (q.spec.format != QuantFormat::kInt4Group) {
    return std::vector<std::uint8_t>(q.codes.begin(), q.codes.end());
  }
  std::vector<std::uint8_t> bytes((q.codes.size() + 1) / 2, 0);
  for (std::size_t i = 0; i < q.codes.size(); ++i) {
    const auto nib = static_cast<std::uint8_t>(q.codes[i] & 0x0F);
    bytes[i / 2] |= (i % 2 == 0) ? nib : static_cast<std::uint8_t>(nib << 4);
  }
  return bytes;
}

}  // namespace

void write_quantized(std::ostream& os, const QuantizedTensor& q) {
  const std::vector<std::uint8_t> bytes = pack_codes(q);
  const nlohmann::json header = {
      {"format", to_string(q.spec.format)},
      {"granularity", to_string(q.spec.granularity)},
      {"shape", q.shape},
      {"group_size", q.spec.group_size},
      {"ragged", q.spec.allow_ragged},
      {"codes", q.codes.size()},
      {"code_bytes", bytes.size()},
      {"scales", q.scales.size()},
  };
  const std::string text = header.dump();
  const auto len = static_cast<std::uint32_t>(text.size());
  os.write(kQuantMagic, 4);
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  os.write(reinterpret_cast<const char*>(q.scales.data()),
           static_cast<std::streamsize>(q.scales.size() * sizeof(float)));
}

QuantizedTensor read_quantized(std::istream& is) {
  auto read = [&](void* dst, std::size_t n, const char* what) {
    is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
      throw FormatError(std::string("truncated ") + what);
    }
  };
  char magic[4];
  read(magic, 4, "header");
  if (!std::equal(magic, magic + 4, kQuantMagic)) {
    throw FormatError("bad magic: expected NVQ1");
  }
  std::uint32_t len = 0;
  read(&len, sizeof len, "header");
  if (len > (1u << 20)) throw FormatError("quantized header too large");
  std::string text(len, '\0');
  read(text.data(), len, "header");

  QuantizedTensor q;
  std::size_t ncodes = 0, nbytes = 0, nscales = 0;
  try {
    const auto h = nlohmann::json::parse(text);
    q.spec.format = parse_quant_format(h.at("format").get<std::string>());
    q.spec.granularity = parse_granularity(h.at("granularity").get<std::string>());
    q.spec.group_size = h.at("group_size").get<std::size_t>();
    q.spec.allow_ragged = h.at("ragged").get<bool>();
    q.shape = h.at("shape").get<std::vector<std::size_t>>();
    ncodes = h.at("codes").get<std::size_t>();
    nbytes = h.at("code_bytes").get<std::size_t>();
    nscales = h.at("scales").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad quantized header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad quantized header: ") + e.what());
  }
  const std::size_t expect_bytes =
      q.spec.format == QuantFormat::kInt4Group ? (ncodes + 1) / 2 : ncodes;
  if (nbytes != expect_bytes || ncodes > (std::size_t{1} << 34) ||
      nscales > ncodes + 1) {
    throw FormatError("inconsistent quantized header counts");
  }
  std::size_t shape_count = 1;
  for (std::size_t d : q.shape) {
    if (d == 0 || shape_count > ncodes / d) {
      throw FormatError("quantized header shape disagrees with its code count");
    }
    shape_count *= d;
  }
  if (q.shape.empty() || shape_count != ncodes) {
    throw FormatError("quantized header shape disagrees with its code count");
  }
  // Chunked so that a lying header fails on truncation, not on allocation.
  std::vector<std::uint8_t> bytes;
  constexpr std::size_t kChunk = std::size_t{1} << 20;
  for (std::size_t done = 0; done < nbytes;) {
    const std::size_t n = std::min(kChunk, nbytes - done);
    bytes.resize(done + n);
    read(bytes.data() + done, n, "payload");
    done += n;
  }
  q.scales.resize(nscales);
  read(q.scales.data(), nscales * sizeof(float), "payload");

  q.codes.resize(ncodes);
  for (std::size_t i = 0; i < ncodes; ++i) {
    if (q.spec.format != QuantFormat::kInt4Group) {
      q.codes[i] = static_cast<std::int8_t>(bytes[i]);
      continue;
    }
    const std::uint8_t nib = (i % 2 == 0) ? (bytes[i / 2] & 0x0F) : (bytes[i / 2] >> 4);
    q.codes[i] = static_cast<std::int8_t>(nib >= 8 ? nib - 16 : nib);
  }
  return q;
}

}  // namespace tokscale
