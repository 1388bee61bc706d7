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

#include "tokscale/seq_pack.hpp"

#include <algorithm>
#include <charconv>

#include "tokscale/error.hpp"

namespace tokscale {

std::size_t PackedBatch::used_tokens() const {
  std::size_t n = 0;
  for (const auto& c : contexts) n += c.used();
  return n;
}

double PackedBatch::utilization() const {
  if (contexts.empty() || capacity == 0) return 0.0;
  return static_cast<double>(used_tokens()) /
         (static_cast<double>(contexts.size()) * static_cast<double>(capacity));
}

PackPolicy PackPolicy::parse(const std::string& text) {
  if (text == "first-fit") return first_fit();
  if (text.rfind("ffd:", 0) == 0) {
    std::size_t w = 0;
    const char* begin = text.data() + 4;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, w);
    if (ec == std::errc() && ptr == end && begin != end && w >= 1) {
      return ffd_window(w);
    }
  }
  throw InvalidArgument("unknown packing policy '" + text +
                        "' (expected first-fit or ffd:W)");
}

std::string PackPolicy::to_string() const {
  if (kind == Kind::kFirstFit) return "first-fit";
  return "ffd:" + std::to_string(window);
}

SequencePacker::SequencePacker(std::size_t capacity, PackPolicy policy)
    : capacity_(capacity), policy_(policy) {
  if (capacity == 0) throw InvalidArgument("packing capacity must be positive");
  if (policy.kind == PackPolicy::Kind::kFirstFitDecreasingWindow &&
      policy.window == 0) {
    throw InvalidArgument("packing window must be positive");
  }
}

void SequencePacker::place(SeqSample sample, std::vector<PackedContext>& emitted) {
  const std::size_t len = sample.length();
  auto it = std::find_if(open_.begin(), open_.end(), [&](const PackedContext& c) {
    return c.used() + len <= capacity_;
  });
  if (it == open_.end()) {
    PackedContext fresh;
    fresh.index = next_index_++;
    open_.push_back(std::move(fresh));
    it = std::prev(open_.end());
  }
  PackedContext& ctx = *it;
  const auto ordinal = static_cast<std::int32_t>(ctx.segments.size() + 1);
  ctx.segments.push_back({std::move(sample.id), ctx.used(), len});
  ctx.payload.insert(ctx.payload.end(), sample.payload.begin(), sample.payload.end());
  ctx.segment_ids.insert(ctx.segment_ids.end(), len, ordinal);

  if (ctx.used() == capacity_) {
    emitted.push_back(std::move(ctx));
    open_.erase(it);
  } else if (policy_.max_open != 0 && open_.size() > policy_.max_open) {
    emitted.push_back(std::move(open_.front()));
    open_.pop_front();
  }
}

std::vector<PackedContext> SequencePacker::push(SeqSample sample) {
  std::vector<PackedContext> emitted;
  if (sample.length() == 0 || sample.length() > capacity_) {
    errors_.push_back({sample.id, sample.length(),
                       sample.length() == 0 ? "empty sample"
                                            : "longer than context capacity"});
    return emitted;
  }
  if (policy_.kind == PackPolicy::Kind::kFirstFit) {
    place(std::move(sample), emitted);
    return emitted;
  }
  buffer_.push_back(std::move(sample));
  while (buffer_.size() >= policy_.window) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < buffer_.size(); ++i) {
      if (buffer_[i].length() > buffer_[pick].length()) pick = i;
    }
    SeqSample chosen = std::move(buffer_[pick]);
    buffer_.erase(buffer_.begin() + static_cast<std::ptrdiff_t>(pick));
    place(std::move(chosen), emitted);
  }
  return emitted;
}

std::vector<PackedContext> SequencePacker::flush() {
  std::vector<PackedContext> emitted;
  std::vector<std::size_t> order(buffer_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return buffer_[a].length() > buffer_[b].length();
  });
  for (std::size_t i : order) place(std::move(buffer_[i]), emitted);
  buffer_.clear();
  while (!open_.empty()) {
    emitted.push_back(std::move(open_.front()));
    open_.pop_front();
  }
  return emitted;
}

PackResult pack_stream(std::span<const SeqSample> samples, std::size_t capacity,
                       PackPolicy policy) {
  SequencePacker packer(capacity, policy);
  PackResult res;
  res.batch.capacity = capacity;
  auto append = [&](std::vector<PackedContext> out) {
    for (auto& c : out) res.batch.contexts.push_back(std::move(c));
  };
  for (const auto& s : samples) append(packer.push(s));
  append(packer.flush());
  res.errors = packer.errors();
  return res;
}

namespace {

void check_context(const PackedContext& c, std::size_t capacity) {
  if (c.used() > capacity) {
    throw CorruptBatch("context " + std::to_string(c.index) + " exceeds capacity");
  }
  if (c.segment_ids.size() != c.payload.size()) {
    throw CorruptBatch("context " + std::to_string(c.index) +
                       ": segment id count differs from payload length");
  }
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < c.segments.size(); ++s) {
    const Segment& seg = c.segments[s];
    if (seg.length == 0 || seg.offset != cursor ||
        seg.offset + seg.length > c.payload.size()) {
      throw CorruptBatch("context " + std::to_string(c.index) + ": segment " +
                         std::to_string(s) + " overlaps, leaves a gap or is out of bounds");
    }
    for (std::size_t t = seg.offset; t < seg.offset + seg.length; ++t) {
      if (c.segment_ids[t] != static_cast<std::int32_t>(s + 1)) {
        throw CorruptBatch("context " + std::to_string(c.index) +
                           ": segment ids disagree with the segment table");
      }
    }
    cursor += seg.length;
  }
  if (cursor != c.payload.size()) {
    throw CorruptBatch("context " + std::to_string(c.index) +
                       ": payload tokens not covered by any segment");
  }
}

}  // namespace

std::vector<SeqSample> unpack(const PackedBatch& b) {
  std::vector<SeqSample> out;
  for (const auto& c : b.contexts) {
    check_context(c, b.capacity);
    for (const auto& seg : c.segments) {
      const auto first = c.payload.begin() + static_cast<std::ptrdiff_t>(seg.offset);
      out.push_back({seg.id, std::vector<std::int32_t>(
                                 first, first + static_cast<std::ptrdiff_t>(seg.length))});
    }
  }
  return out;
}

AttentionMask attention_mask(const PackedBatch& b, std::size_t context_index) {
  if (context_index >= b.contexts.size()) {
    throw InvalidArgument("context index out of range");
  }
  const PackedContext& c = b.contexts[context_index];
  check_context(c, b.capacity);
  const std::size_t n = c.used();
  std::vector<std::uint8_t> bits(n * n, 0);
  for (const auto& seg : c.segments) {
    const auto last = static_cast<std::int64_t>(seg.offset + seg.length);
#pragma omp parallel for schedule(static)
    for (std::int64_t q = static_cast<std::int64_t>(seg.offset); q < last; ++q) {
      const auto row = static_cast<std::size_t>(q);
      std::fill(bits.begin() + static_cast<std::ptrdiff_t>(row * n + seg.offset),
                bits.begin() + static_cast<std::ptrdiff_t>(row * n + row + 1), 1);
    }
  }
  return AttentionMask(n, std::move(bits));
}

}  // namespace tokscale
