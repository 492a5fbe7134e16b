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

#ifndef KI_INPUT_ENCODING_H_
#define KI_INPUT_ENCODING_H_

#include <optional>
#include <string>
#include <vector>

#include "ki/entity_extraction.h"
#include "ki/kg_store.h"
#include "ki/types.h"
#include "ki/vocabulary.h"

namespace ki {

inline constexpr int kTokenTypeSentence1 = 0;
inline constexpr int kTokenTypeSentence2 = 1;
inline constexpr int kTokenTypeEntity = 2;

// Lexicon tables consulted for entity embeddings, one per entity type.
struct KgTables {
  const KgEmbeddingTable *conceptual = nullptr;
  const KgEmbeddingTable *ambiguous = nullptr;

  const KgEmbeddingTable *for_type(EntityType t) const {
    return t == EntityType::kConceptual ? conceptual : ambiguous;
  }
};

// One entity position in the input sequence.
struct EntitySlot {
  // Lexicon key; empty means the learned [ENT_UNK] vector is used.
  std::string entity_id;
  EntityType etype = EntityType::kConceptual;
  // Full-sequence indices of the spanned tokens (after the [CLS] offset).
  TokenSpan span;
  int sentence = 1;

  bool operator==(const EntitySlot &) const = default;
};

// Boundary metadata: n sentence-1 tokens, m tokens in total, n' and m'
// entity slots for sentence 1 and sentence 2.
struct SeqLayout {
  int n = 0;
  int m = 0;
  int n_ent1 = 0;
  int n_ent2 = 0;

  bool operator==(const SeqLayout &) const = default;
};

// Full model input. Sequence order:
//   [CLS] s1 [SEP] s2 [SEP] | s1-entities [SEP] s2-entities [SEP]
// `token_ids` covers the first m+3 positions; `token_types` and
// `position_ids` cover the whole sequence.
struct EncodedInput {
  std::vector<int> token_ids;
  std::vector<EntitySlot> entities;
  std::vector<int> token_types;
  std::vector<int> position_ids;
  SeqLayout layout;
  int truncated_entities = 0;

  int num_tokens() const { return layout.m + 3; }
  int seq_len() const { return static_cast<int>(position_ids.size()); }
  // Sequence index of entity slot k.
  int entity_index(int k) const;
  // Sequence indices of the two entity-segment [SEP] markers.
  int entity_sep1_index() const { return num_tokens() + layout.n_ent1; }
  int entity_sep2_index() const { return seq_len() - 1; }
  bool is_entity_sep(int i) const {
    return i == entity_sep1_index() || i == entity_sep2_index();
  }

  bool operator==(const EncodedInput &) const = default;
};

struct EncodingOptions {
  int max_positions = 128;
  int max_entities_per_sentence = 16;
  // Entity slots and entity-segment [SEP]s get token type 2; otherwise 1.
  bool entity_token_types = true;
  // Entity slots take the position id of their first spanned token;
  // otherwise they continue the sequential numbering after the tokens.
  bool position_alignment = true;
  // Entities missing from `tables` keep a slot with the [ENT_UNK] vector;
  // otherwise they are dropped. Only consulted when tables are given.
  bool use_ent_unk = true;
};

// Builds the input sequence. Annotation spans index the combined token
// sequence s1 ++ s2 (see Entity). Throws EncodingError on inconsistent
// spans or when the tokens alone exceed max_positions.
EncodedInput assemble_input(const std::vector<std::string> &tokens_s1,
                            const std::vector<std::string> &tokens_s2,
                            const EntityAnnotations &annotations,
                            const Vocabulary &vocab,
                            const EncodingOptions &options = {},
                            const KgTables *tables = nullptr);

// Splits token_ids back into the two sentences' token strings.
std::pair<std::vector<std::string>, std::vector<std::string>> decode_tokens(
    const EncodedInput &encoded, const Vocabulary &vocab);

}  // namespace ki

#endif  // KI_INPUT_ENCODING_H_
