/*
Copyright 2025 the iac authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

     https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <string>
#include <vector>

namespace iac {

inline constexpr const char* kToolVersion = "iac 0.1.0";

/// Shortest round-trippable decimal representation of a double; artifacts
/// must reload bit-exactly.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Splits on `sep`, trimming surrounding whitespace from each field.
std::vector<std::string> split(const std::string& line, char sep);
std::string trim(const std::string& s);

}  // namespace iac
