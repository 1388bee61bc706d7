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

// Single-threaded reference versions of the OpenMP kernels. They follow the
// same arithmetic element by element, so the parallel kernels must match
// them bitwise; tests and the benchmark target compare the two.

#ifndef TOKSCALE_REFERENCE_HPP_
#define TOKSCALE_REFERENCE_HPP_

#include <span>
#include <vector>

#include "tokscale/dataset_prune.hpp"
#include "tokscale/quant_sim.hpp"
#include "tokscale/tensor.hpp"
#include "tokscale/token_compress.hpp"

namespace tokscale::reference {

FeatureMap interpolate_bilinear(const FeatureMap& src, std::size_t out_h,
                                std::size_t out_w);
FeatureMap block_average(const FeatureMap& src, std::size_t block_h,
                         std::size_t block_w);
TokenGrid stc_reshape(const TokenGrid& g, std::size_t k);
VideoTokenTensor temporal_pool(const VideoTokenTensor& v, std::size_t ratio);
std::vector<double> delta_scores(std::span<const SampleRecord> records,
                                 Aggregation agg = Aggregation::kMean);
QuantizedTensor quantize(std::span<const double> values,
                         std::span<const std::size_t> shape,
                         const QuantSpec& spec);

}  // namespace tokscale::reference

#endif  // TOKSCALE_REFERENCE_HPP_
