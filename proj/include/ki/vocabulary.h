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

#ifndef KI_VOCABULARY_H_
#define KI_VOCABULARY_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ki {

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kEntUnkToken = "[ENT_UNK]";

// Subword continuation prefix.
inline constexpr std::string_view kContinuation = "##";

// Token-string <-> id bijection. The five reserved tokens occupy ids 0-4 in
// a freshly built vocabulary; a loaded file may place them anywhere but must
// contain each exactly once.
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);

  // Builds a vocabulary from sentences: reserved tokens, then every
  // character seen (bare and as a continuation piece), then whole words by
  // descending frequency (ties alphabetical), up to `max_words`.
  static Vocabulary build(const std::vector<std::string> &sentences,
                          size_t max_words = 30000);

  // One token per line, id = zero-based line number.
  static Vocabulary load(const std::filesystem::path &path);
  void save(const std::filesystem::path &path) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(std::string_view token) const;
  // Returns unk_id() for unknown tokens.
  int id(std::string_view token) const;
  const std::string &token(int id) const { return tokens_.at(id); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }
  int ent_unk_id() const { return ent_unk_id_; }

  bool operator==(const Vocabulary &other) const { return tokens_ == other.tokens_; }

 private:
  void index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  int pad_id_ = 0, unk_id_ = 1, cls_id_ = 2, sep_id_ = 3, ent_unk_id_ = 4;
};

// Lowercases, splits ASCII punctuation into separate words, and collapses
// whitespace to single spaces.
std::string normalize_text(std::string_view text);

// Whitespace split of normalize_text(text).
std::vector<std::string> split_words(std::string_view text);

// Greedy longest-prefix subword segmentation of each word. Pieces after the
// first carry the "##" prefix. A character with no matching piece becomes
// [UNK] and segmentation resumes after it.
std::vector<std::string> tokenize(std::string_view sentence,
                                  const Vocabulary &vocab);

// Joins tokens back into text: continuation pieces attach to the previous
// token, others are space-separated.
std::string detokenize(const std::vector<std::string> &tokens);

}  // namespace ki

#endif  // KI_VOCABULARY_H_
