// Copyright 2026-present the linklab project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace linklab {

/// Bad caller-supplied argument (window too small, K < 1, P > n, ...).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A ratio or statistic is undefined for the given input (e.g. empty sets).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Malformed file or stream contents.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// NaN/Inf reached the training math.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The index cannot supply the requested number of distinct negatives.
struct InsufficientNegativesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace linklab
