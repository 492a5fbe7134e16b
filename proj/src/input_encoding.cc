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

#include "ki/input_encoding.h"

#include "ki/errors.h"

namespace ki {

int EncodedInput::entity_index(int k) const {
  // s2 entities sit after the first entity-segment [SEP].
  return k < layout.n_ent1 ? num_tokens() + k : num_tokens() + k + 1;
}

EncodedInput assemble_input(const std::vector<std::string> &tokens_s1,
                            const std::vector<std::string> &tokens_s2,
                            const EntityAnnotations &annotations,
                            const Vocabulary &vocab,
                            const EncodingOptions &options,
                            const KgTables *tables) {
  const int n = static_cast<int>(tokens_s1.size());
  const int m = n + static_cast<int>(tokens_s2.size());
  if (m + 3 > options.max_positions) {
    throw EncodingError("record has " + std::to_string(m + 3) +
                        " token positions, limit is " +
                        std::to_string(options.max_positions));
  }

  EncodedInput enc;
  enc.layout.n = n;
  enc.layout.m = m;
  enc.token_ids.reserve(m + 3);
  enc.token_ids.push_back(vocab.cls_id());
  for (const auto &t : tokens_s1) enc.token_ids.push_back(vocab.id(t));
  enc.token_ids.push_back(vocab.sep_id());
  for (const auto &t : tokens_s2) enc.token_ids.push_back(vocab.id(t));
  enc.token_ids.push_back(vocab.sep_id());

  std::vector<EntitySlot> s1_slots, s2_slots;
  for (const Entity &e : annotations.entities) {
    const bool in_s1 = e.span.first >= 0 && e.span.last < n;
    const bool in_s2 = e.span.first >= n && e.span.last < m;
    if (e.span.last < e.span.first || (e.sentence == 1 && !in_s1) ||
        (e.sentence == 2 && !in_s2) || (e.sentence != 1 && e.sentence != 2)) {
      throw EncodingError("entity '" + e.surface +
                          "' span is inconsistent with the token lists");
    }
    EntitySlot slot;
    slot.entity_id = e.normalized_id;
    slot.etype = e.etype;
    slot.sentence = e.sentence;
    // [CLS] shifts s1 by one; s2 also follows the first [SEP].
    const int shift = e.sentence == 1 ? 1 : 2;
    slot.span = {e.span.first + shift, e.span.last + shift};
    if (tables != nullptr) {
      const KgEmbeddingTable *table = tables->for_type(e.etype);
      if (table == nullptr || !table->contains(slot.entity_id)) {
        if (!options.use_ent_unk) {
          ++enc.truncated_entities;
          continue;
        }
        slot.entity_id.clear();
      }
    }
    auto &bucket = e.sentence == 1 ? s1_slots : s2_slots;
    if (static_cast<int>(bucket.size()) >= options.max_entities_per_sentence) {
      ++enc.truncated_entities;
      continue;
    }
    bucket.push_back(std::move(slot));
  }

  // Sequential positions must also fit the position table.
  if (!options.position_alignment) {
    while (m + 3 + static_cast<int>(s1_slots.size() + s2_slots.size()) + 2 >
           options.max_positions) {
      auto &bucket = s2_slots.empty() ? s1_slots : s2_slots;
      bucket.pop_back();
      ++enc.truncated_entities;
    }
  }

  enc.layout.n_ent1 = static_cast<int>(s1_slots.size());
  enc.layout.n_ent2 = static_cast<int>(s2_slots.size());
  enc.entities = std::move(s1_slots);
  for (auto &s : s2_slots) enc.entities.push_back(std::move(s));

  const int total = m + 3 + static_cast<int>(enc.entities.size()) + 2;
  enc.token_types.assign(total, 0);
  enc.position_ids.assign(total, 0);
  for (int i = 0; i < m + 3; ++i) {
    enc.token_types[i] = i <= n + 1 ? kTokenTypeSentence1 : kTokenTypeSentence2;
    enc.position_ids[i] = i;
  }
  const int entity_type =
      options.entity_token_types ? kTokenTypeEntity : kTokenTypeSentence2;
  for (int i = m + 3; i < total; ++i) {
    enc.token_types[i] = entity_type;
    enc.position_ids[i] = options.position_alignment ? m + 2 : i;
  }
  for (int k = 0; k < static_cast<int>(enc.entities.size()); ++k) {
    if (options.position_alignment) {
      enc.position_ids[enc.entity_index(k)] = enc.entities[k].span.first;
    }
  }
  return enc;
}

std::pair<std::vector<std::string>, std::vector<std::string>> decode_tokens(
    const EncodedInput &encoded, const Vocabulary &vocab) {
  std::vector<std::string> s1, s2;
  const int n = encoded.layout.n;
  for (int i = 1; i <= n; ++i) s1.push_back(vocab.token(encoded.token_ids[i]));
  for (int i = n + 2; i < encoded.layout.m + 2; ++i) {
    s2.push_back(vocab.token(encoded.token_ids[i]));
  }
  return {std::move(s1), std::move(s2)};
}

}  // namespace ki
