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

#include "ki/vocabulary.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "ki/errors.h"

namespace ki {

namespace {

const std::string_view kReserved[] = {kPadToken, kUnkToken, kClsToken,
                                      kSepToken, kEntUnkToken};

bool starts_with_continuation(std::string_view token) {
  return token.substr(0, kContinuation.size()) == kContinuation;
}

}  // namespace

Vocabulary::Vocabulary() {
  for (auto r : kReserved) tokens_.emplace_back(r);
  index();
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  index();
}

void Vocabulary::index() {
  ids_.clear();
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ConfigError("vocabulary token '" + tokens_[i] + "' appears twice");
    }
  }
  auto require = [&](std::string_view t) {
    auto it = ids_.find(std::string(t));
    if (it == ids_.end()) {
      throw ConfigError("vocabulary lacks reserved token " + std::string(t));
    }
    return it->second;
  };
  pad_id_ = require(kPadToken);
  unk_id_ = require(kUnkToken);
  cls_id_ = require(kClsToken);
  sep_id_ = require(kSepToken);
  ent_unk_id_ = require(kEntUnkToken);
}

Vocabulary Vocabulary::build(const std::vector<std::string> &sentences,
                             size_t max_words) {
  std::map<std::string, int> counts;
  std::set<char> chars;
  for (const auto &s : sentences) {
    for (auto &w : split_words(s)) {
      for (char c : w) chars.insert(c);
      ++counts[w];
    }
  }

  std::vector<std::string> tokens;
  for (auto r : kReserved) tokens.emplace_back(r);
  for (char c : chars) tokens.emplace_back(1, c);
  for (char c : chars) tokens.push_back(std::string(kContinuation) + c);

  std::vector<std::pair<std::string, int>> words(counts.begin(), counts.end());
  std::stable_sort(words.begin(), words.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  std::set<std::string> present(tokens.begin(), tokens.end());
  size_t added = 0;
  for (auto &[w, n] : words) {
    if (added >= max_words) break;
    if (present.insert(w).second) {
      tokens.push_back(w);
      ++added;
    }
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write vocabulary " + path.string());
  for (const auto &t : tokens_) out << t << '\n';
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? unk_id_ : it->second;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 8);
  auto space = [&] {
    if (!out.empty() && out.back() != ' ') out.push_back(' ');
  };
  for (char raw : text) {
    auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      space();
    } else if (std::ispunct(c) && raw != '_' && raw != '%' && raw != ':') {
      space();
      out.push_back(raw);
      out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string norm = normalize_text(text);
  size_t i = 0;
  while (i < norm.size()) {
    size_t j = norm.find(' ', i);
    if (j == std::string::npos) j = norm.size();
    if (j > i) words.push_back(norm.substr(i, j - i));
    i = j + 1;
  }
  return words;
}

std::vector<std::string> tokenize(std::string_view sentence,
                                  const Vocabulary &vocab) {
  std::vector<std::string> out;
  for (const auto &word : split_words(sentence)) {
    size_t start = 0;
    while (start < word.size()) {
      const std::string prefix = start > 0 ? std::string(kContinuation) : "";
      size_t end = word.size();
      bool found = false;
      for (; end > start; --end) {
        std::string piece = prefix + word.substr(start, end - start);
        if (vocab.contains(piece)) {
          out.push_back(std::move(piece));
          found = true;
          break;
        }
      }
      if (!found) {
        out.emplace_back(kUnkToken);
        end = start + 1;
      }
      start = end;
    }
  }
  return out;
}

std::string detokenize(const std::vector<std::string> &tokens) {
  std::string out;
  for (const auto &t : tokens) {
    if (starts_with_continuation(t) && !out.empty()) {
      out += t.substr(kContinuation.size());
    } else {
      if (!out.empty()) out.push_back(' ');
      out += t;
    }
  }
  return out;
}

}  // namespace ki
