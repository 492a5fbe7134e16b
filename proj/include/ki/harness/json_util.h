// Copyright 2026 The KI-Encoder Authors.
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

#ifndef KI_HARNESS_JSON_UTIL_H_
#define KI_HARNESS_JSON_UTIL_H_

#include <set>
#include <string>

#include "json.hpp"
#include "ki/errors.h"

namespace ki {

// Reads optional keys from one config section and rejects anything it was
// not asked about.
class SectionReader {
 public:
  SectionReader(const nlohmann::json &j, std::string section)
      : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError("config section '" + section_ + "' must be an object");
  }

  template <typename T>
  bool get(const std::string &key, T &out) {
    seen_.insert(key);
    if (!j_.contains(key)) return false;
    try {
      j_.at(key).get_to(out);
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError(section_ + "." + key + ": " + e.what());
    }
    return true;
  }

  const nlohmann::json *raw(const std::string &key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (seen_.count(it.key()) == 0) {
        throw ConfigError("unknown key '" + section_ + "." + it.key() + "'");
      }
    }
  }

 private:
  const nlohmann::json &j_;
  std::string section_;
  std::set<std::string> seen_;
};

// Rounds to 9 significant digits so report files diff cleanly.
double round_sig9(double x);

// Recursively applies round_sig9 to every floating-point value.
nlohmann::json round_floats(const nlohmann::json &j);

}  // namespace ki

#endif  // KI_HARNESS_JSON_UTIL_H_
