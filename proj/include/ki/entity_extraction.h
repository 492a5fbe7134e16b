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

#ifndef KI_ENTITY_EXTRACTION_H_
#define KI_ENTITY_EXTRACTION_H_

#include <optional>
#include <string>
#include <vector>

#include "ki/kg_store.h"
#include "ki/types.h"
#include "ki/vocabulary.h"

namespace ki {

// Inclusive token range [first, last].
struct TokenSpan {
  int first = 0;
  int last = 0;

  int length() const { return last - first + 1; }
  bool contains(int i) const { return i >= first && i <= last; }
  bool contains(const TokenSpan &o) const {
    return o.first >= first && o.last <= last;
  }
  bool overlaps(const TokenSpan &o) const {
    return first <= o.last && o.first <= last;
  }
  bool operator==(const TokenSpan &) const = default;
};

// An extracted entity. `span` indexes the combined token sequence: sentence-1
// tokens are 0..n-1, sentence-2 tokens follow at n..m-1.
struct Entity {
  std::string surface;
  std::string normalized_id;
  TokenSpan span;
  int sentence = 1;
  EntityType etype = EntityType::kConceptual;
  std::optional<std::string> sense_id;

  bool operator==(const Entity &) const = default;
};

// Entities ordered sentence-1 first, then by span start.
struct EntityAnnotations {
  std::vector<Entity> entities;

  size_t count(int sentence) const;
  bool operator==(const EntityAnnotations &) const = default;
};

inline constexpr int kDefaultMaxNgram = 5;

// Gazetteer match of token n-grams against lexicon keys. A candidate is kept
// only if it is out-of-vocabulary for the model (multi-token, or a single
// token absent from `model_vocab`). Overlaps resolve longest-first, then
// leftmost; nothing inside an accepted span is matched again. N-grams never
// start or end inside a subword-split word.
std::vector<Entity> extract_conceptual(const std::vector<std::string> &tokens_s1,
                                       const std::vector<std::string> &tokens_s2,
                                       const KgEmbeddingTable &lexicon,
                                       const Vocabulary &model_vocab,
                                       int max_ngram = kDefaultMaxNgram);

// Upstream word-sense annotation. `span` indexes the tokens of `sentence`.
struct SenseTag {
  int sentence = 1;
  TokenSpan span;
  std::string sense_id;
};

struct AmbiguousResult {
  std::vector<Entity> entities;
  int dropped = 0;  // tags whose sense_id is absent from the lexicon
};

// Throws AnnotationError naming `record_id` when a tag span is out of range.
AmbiguousResult extract_ambiguous(const std::vector<std::string> &tokens_s1,
                                  const std::vector<std::string> &tokens_s2,
                                  const std::vector<SenseTag> &sense_tags,
                                  const KgEmbeddingTable &sense_lexicon,
                                  const std::string &record_id = "");

// Merges and orders both entity lists. Throws AnnotationError when two
// entities of the same type have nested (or equal) spans.
EntityAnnotations build_annotations(std::vector<Entity> conceptual,
                                    std::vector<Entity> ambiguous);

}  // namespace ki

#endif  // KI_ENTITY_EXTRACTION_H_
