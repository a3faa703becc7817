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

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "linklab/error.hpp"
#include "linklab/trainer.hpp"

namespace linklab {

using ConfigMap = std::map<std::string, std::string>;

struct UnknownKeyError : ArgumentError {
  using ArgumentError::ArgumentError;
};

/// Flat `key = value` lines; `#` starts a comment. Throws FormatError on a
/// line without '='.
ConfigMap parse_config(std::string_view text);

/// Parses `key=value` (as given to --set).
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Applies the training keys of `values` to `cfg`. `preset = final_round`
/// is applied before the other keys. Keys that are neither training keys
/// nor in `extra_keys` raise UnknownKeyError naming them.
void apply_config(TrainConfig& cfg, const ConfigMap& values,
                  const std::set<std::string>& extra_keys = {});

/// Every training key with its current value, as strings.
ConfigMap describe(const TrainConfig& cfg);

}  // namespace linklab
