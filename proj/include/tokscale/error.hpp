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

#ifndef TOKSCALE_ERROR_HPP_
#define TOKSCALE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tokscale {

// Violated precondition on a library call (bad shape, zero block, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed bytes on disk or in a stream: bad magic, truncated payload.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A packed batch whose segment table is inconsistent with its payload.
class CorruptBatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantized tensor whose codes or scales are outside the format's range.
class CorruptTensor : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration file or command line that names an unknown key or holds
// a value of the wrong type.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tokscale

#endif  // TOKSCALE_ERROR_HPP_
