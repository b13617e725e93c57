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

#include "doalab/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "doalab/errors.hpp"

namespace doalab::harness {
namespace {

struct KeySpec {
  const char* key;
  const char* fallback;
  // per-experiment overrides, indexed by Experiment; nullptr keeps fallback
  const char* per[5];
};

// roc, rmse-snr, rmse-eta, loss-bits, train-mlnn
const KeySpec kKeys[] = {
    {"run.seed", "1", {}},
    {"run.trials", "2000", {"10000", nullptr, nullptr, nullptr, "10000"}},
    {"run.workers", "1", {}},
    {"run.out", "results", {}},
    {"run.model", "", {}},
    {"array.antennas", "64", {nullptr, nullptr, nullptr, "32", nullptr}},
    {"array.subarray", "4", {"1", nullptr, nullptr, "1", "1"}},
    {"array.spacing", "0.5", {}},
    {"array.eta", "0.25", {}},
    {"scenario.theta_deg", "17.5", {}},
    {"scenario.snr_db", "-10,-5,0,5,10,15", {"-20", nullptr, "-10,0,10", "-10,0,10", "-20"}},
    {"scenario.snapshots", "1", {"200", nullptr, nullptr, "100", "200"}},
    {"scenario.noise_power", "1", {}},
    {"scenario.signal", "constant-modulus", {}},
    {"detect.glrt", "sphericity", {}},
    {"detect.fap", "0.01,0.1", {}},
    {"detect.calibration_trials", "10000", {}},
    {"eta.grid", "0.0625,0.25,0.5,0.75,1", {}},
    {"quant.bits", "1,2,3,4,5,6,7,8", {}},
    {"quant.include_unquantized", "true", {}},
    {"mlnn.activations", "sigmoid,tanh,relu", {}},
    {"mlnn.shapes", "4;8;16;8x4", {}},
    {"mlnn.dataset_ratio", "8", {}},
    {"mlnn.selection_examples", "2000", {}},
    {"mlnn.validation_examples", "2000", {}},
    {"mlnn.epochs", "40", {}},
    {"mlnn.learning_rate", "0.05", {}},
    {"mlnn.momentum", "0.9", {}},
    {"mlnn.batch", "32", {}},
    {"mlnn.loss", "mse", {}},
    {"mlnn.snr_jitter_db", "0", {}},
};

// never part of the digest
const std::set<std::string> kVolatile = {"run.workers", "run.out", "run.model"};

const KeySpec* find_key(std::string_view key) {
  for (const auto& k : kKeys)
    if (key == k.key) return &k;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kRoc: return "roc";
    case Experiment::kRmseSnr: return "rmse-snr";
    case Experiment::kRmseEta: return "rmse-eta";
    case Experiment::kLossBits: return "loss-bits";
    case Experiment::kTrainMlnn: return "train-mlnn";
  }
  return "?";
}

Experiment experiment_from_string(std::string_view s) {
  for (auto e : {Experiment::kRoc, Experiment::kRmseSnr, Experiment::kRmseEta, Experiment::kLossBits,
                 Experiment::kTrainMlnn})
    if (s == to_string(e)) return e;
  throw ConfigError(fmt::format("unknown experiment '{}' (roc, rmse-snr, rmse-eta, loss-bits, train-mlnn)", s));
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& k : kKeys) out.emplace_back(k.key);
  return out;
}

Config Config::defaults(Experiment e) {
  Config c(e);
  for (const auto& k : kKeys) {
    const char* v = k.per[static_cast<int>(e)];
    c.values_[k.key] = v ? v : k.fallback;
  }
  return c;
}

Config Config::parse(std::string_view ini_text, Experiment e) {
  Config c = defaults(e);
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& err) {
    throw ConfigError(fmt::format("config line {}: {}", err.line(), err.message()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      if (section == "experiment") {
        if (trim(body.data()) != to_string(e))
          throw ConfigError(fmt::format("config is for experiment '{}', not '{}'", trim(body.data()), to_string(e)));
        continue;
      }
      throw ConfigError(fmt::format("key '{}' outside any section", section));
    }
    for (const auto& [name, leaf] : body) {
      if (!leaf.empty()) throw ConfigError(fmt::format("nested key {}.{}", section, name));
      c.set(section + "." + name, trim(leaf.data()));
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path, Experiment e) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), e);
}

void Config::set(const std::string& key, std::string value) {
  if (!find_key(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
  values_[key] = std::move(value);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ContractError(fmt::format("config key '{}' is not defined", key));
  return it->second;
}

double Config::real(const std::string& key) const {
  const std::string& s = text(key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(fmt::format("{} = '{}' is not a finite number", key, s));
  return v;
}

int Config::integer(const std::string& key) const {
  const std::string& s = text(key);
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(fmt::format("{} = '{}' is not an integer", key, s));
  return v;
}

std::uint64_t Config::unsigned64(const std::string& key) const {
  const std::string& s = text(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(fmt::format("{} = '{}' is not an unsigned integer", key, s));
  return v;
}

bool Config::flag(const std::string& key) const {
  const std::string& s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(fmt::format("{} = '{}' is not a boolean", key, s));
}

std::vector<std::string> Config::words(const std::string& key, char sep) const {
  std::vector<std::string> out;
  std::string_view rest = text(key);
  while (!rest.empty()) {
    const auto cut = rest.find(sep);
    const std::string item = trim(rest.substr(0, cut));
    if (item.empty()) throw ConfigError(fmt::format("{} has an empty list item", key));
    out.push_back(item);
    if (cut == std::string_view::npos) break;
    rest.remove_prefix(cut + 1);
    if (rest.empty()) throw ConfigError(fmt::format("{} has a trailing separator", key));
  }
  if (out.empty()) throw ConfigError(fmt::format("{} must not be empty", key));
  return out;
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : words(key)) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size() || !std::isfinite(v))
      throw ConfigError(fmt::format("{} item '{}' is not a finite number", key, w));
    out.push_back(v);
  }
  return out;
}

std::string Config::canonical() const {
  std::string out = fmt::format("experiment={}\n", to_string(experiment_));
  for (const auto& [k, v] : values_)
    if (!kVolatile.count(k)) out += fmt::format("{}={}\n", k, v);
  return out;
}

std::uint64_t Config::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string Config::digest_hex() const { return fmt::format("{:016x}", digest()); }

}  // namespace doalab::harness
