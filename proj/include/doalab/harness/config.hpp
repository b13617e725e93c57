// Copyright 2026 The doa-lab Authors
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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace doalab::harness {

enum class Experiment { kRoc, kRmseSnr, kRmseEta, kLossBits, kTrainMlnn };

std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view s);  // ConfigError on unknown tags

// Flat "section.key" -> text map. Every key has a default (some depend on the
// experiment); setting a key outside the table is a ConfigError.
class Config {
 public:
  static Config defaults(Experiment e);
  static Config parse(std::string_view ini_text, Experiment e);
  static Config load(const std::filesystem::path& path, Experiment e);

  Experiment experiment() const { return experiment_; }

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;

  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  int integer(const std::string& key) const;
  std::uint64_t unsigned64(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;   // comma separated
  std::vector<std::string> words(const std::string& key, char sep = ',') const;

  // Canonical text of everything that can change results. Worker count and
  // output locations are left out so they never perturb a digest.
  std::string canonical() const;
  std::uint64_t digest() const;      // FNV-1a 64 of canonical()
  std::string digest_hex() const;    // 16 hex digits

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  explicit Config(Experiment e) : experiment_(e) {}
  Experiment experiment_;
  std::map<std::string, std::string> values_;
};

std::vector<std::string> known_keys();

}  // namespace doalab::harness
