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

// Streaming sequence packing. Samples are concatenated into fixed-capacity
// contexts; each context carries a segment table and per-token segment ids
// so a block-diagonal causal mask keeps packed samples from attending to
// each other.

#ifndef TOKSCALE_SEQ_PACK_HPP_
#define TOKSCALE_SEQ_PACK_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

namespace tokscale {

struct SeqSample {
  std::string id;
  std::vector<std::int32_t> payload;

  std::size_t length() const { return payload.size(); }
  friend bool operator==(const SeqSample&, const SeqSample&) = default;
};

struct Segment {
  std::string id;
  std::size_t offset = 0;
  std::size_t length = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct PackedContext {
  std::size_t index = 0;  // creation order within the stream
  std::vector<Segment> segments;
  std::vector<std::int32_t> payload;
  // 1-based segment ordinal per token; 0 is left for padding.
  std::vector<std::int32_t> segment_ids;

  std::size_t used() const { return payload.size(); }
};

struct PackedBatch {
  std::size_t capacity = 0;
  std::vector<PackedContext> contexts;  // emission order

  std::size_t used_tokens() const;
  // used_tokens / (contexts * capacity); 0 for an empty batch.
  double utilization() const;
};

// A sample the packer refused (empty or longer than the capacity).
struct PackError {
  std::string id;
  std::size_t length = 0;
  std::string reason;
};

struct PackPolicy {
  enum class Kind { kFirstFit, kFirstFitDecreasingWindow };
  Kind kind = Kind::kFirstFit;
  std::size_t window = 1;  // buffered samples for the decreasing variant
  // Open contexts kept before the oldest is emitted; 0 means unbounded.
  std::size_t max_open = 0;

  static PackPolicy first_fit() { return {}; }
  static PackPolicy ffd_window(std::size_t w) {
    return {Kind::kFirstFitDecreasingWindow, w, 0};
  }
  // "first-fit" or "ffd:W".
  static PackPolicy parse(const std::string& text);
  std::string to_string() const;
};

// Single-writer streaming packer. First-fit places each sample in the
// earliest-created open context with room. The windowed variant buffers
// `window` samples and places the longest buffered one (earliest on ties)
// whenever the buffer is full. Contexts are emitted when they become
// exactly full, when `max_open` is exceeded (oldest first) or on flush().
class SequencePacker {
 public:
  SequencePacker(std::size_t capacity, PackPolicy policy);

  // Returns contexts that were closed by this push.
  std::vector<PackedContext> push(SeqSample sample);
  std::vector<PackedContext> flush();

  const std::vector<PackError>& errors() const { return errors_; }

 private:
  void place(SeqSample sample, std::vector<PackedContext>& emitted);

  std::size_t capacity_;
  PackPolicy policy_;
  std::size_t next_index_ = 0;
  std::deque<PackedContext> open_;
  std::vector<SeqSample> buffer_;
  std::vector<PackError> errors_;
};

struct PackResult {
  PackedBatch batch;
  std::vector<PackError> errors;
};

PackResult pack_stream(std::span<const SeqSample> samples,
                       std::size_t capacity, PackPolicy policy);

// Recovers samples context by context in offset order. Throws CorruptBatch
// when a segment table overlaps, leaves gaps, overruns the payload or the
// capacity, or disagrees with the segment ids.
std::vector<SeqSample> unpack(const PackedBatch& b);

// Row-major n x n mask over the context's used tokens: (q, k) is set iff
// both tokens belong to the same segment and k <= q.
class AttentionMask {
 public:
  AttentionMask(std::size_t n, std::vector<std::uint8_t> bits)
      : n_(n), bits_(std::move(bits)) {}
  std::size_t size() const { return n_; }
  bool operator()(std::size_t q, std::size_t k) const {
    return bits_[q * n_ + k] != 0;
  }
  std::span<const std::uint8_t> bits() const { return bits_; }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

AttentionMask attention_mask(const PackedBatch& b, std::size_t context_index);

}  // namespace tokscale

#endif  // TOKSCALE_SEQ_PACK_HPP_
