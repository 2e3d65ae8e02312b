// Copyright 2026 The fusesim Authors.
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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fusesim::cli {

std::string sha256_hex(std::string_view data);

/// Writes via a temporary file in the same directory and renames it over
/// the target.
void write_atomic(const std::string& path, std::string_view content);

struct RunManifest {
  std::vector<std::string> command;
  std::string config_json;
  std::map<std::string, std::string> input_digests;   // path -> sha256
  std::map<std::string, std::string> output_digests;  // path -> sha256
  std::string tool_version;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

}  // namespace fusesim::cli
