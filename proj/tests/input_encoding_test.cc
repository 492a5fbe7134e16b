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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "ki/errors.h"
#include "ki/input_encoding.h"
#include "test_util.h"

namespace ki {
namespace {

Vocabulary vocab_for(const std::vector<std::string> &words) {
  std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[ENT_UNK]"};
  for (const auto &w : words) {
    if (std::find(tokens.begin(), tokens.end(), w) == tokens.end()) tokens.push_back(w);
  }
  return Vocabulary(tokens);
}

Entity conceptual(int sentence, TokenSpan span, const std::string &id) {
  Entity e;
  e.surface = id;
  e.normalized_id = id;
  e.sentence = sentence;
  e.span = span;
  return e;
}

TEST_CASE("layout with one sentence-1 entity") {
  Vocabulary v = vocab_for({"a", "b", "c"});
  auto ann = build_annotations({conceptual(1, {0, 1}, "ab")}, {});
  EncodedInput enc = assemble_input({"a", "b"}, {"c"}, ann, v);

  CHECK(enc.token_ids == std::vector<int>{v.cls_id(), v.id("a"), v.id("b"), v.sep_id(),
                                          v.id("c"), v.sep_id()});
  CHECK(enc.layout == SeqLayout{2, 3, 1, 0});
  REQUIRE(enc.entities.size() == 1);
  CHECK(enc.entities[0].span == TokenSpan{1, 2});
  CHECK(enc.seq_len() == 9);
  CHECK(enc.entity_index(0) == 6);
  CHECK(enc.entity_sep1_index() == 7);
  CHECK(enc.entity_sep2_index() == 8);
  CHECK(enc.token_types == std::vector<int>{0, 0, 0, 0, 1, 1, 2, 2, 2});
  CHECK(enc.position_ids == std::vector<int>{0, 1, 2, 3, 4, 5, 1, 5, 5});
}

TEST_CASE("layout without entities") {
  Vocabulary v = vocab_for({"a", "b", "c"});
  EncodedInput enc = assemble_input({"a", "b"}, {"c"}, {}, v);
  CHECK(enc.seq_len() == 8);
  CHECK(enc.entities.empty());
  CHECK(enc.token_types == std::vector<int>{0, 0, 0, 0, 1, 1, 2, 2});
  CHECK(enc.position_ids == std::vector<int>{0, 1, 2, 3, 4, 5, 5, 5});
}

TEST_CASE("sentence-2 entity aligns to its first token") {
  Vocabulary v = vocab_for({"a", "b", "c", "d"});
  auto ann = build_annotations({conceptual(2, {3, 4}, "cd")}, {});
  EncodedInput enc = assemble_input({"a", "b"}, {"x", "c", "d"}, ann, v);
  // [CLS] a b [SEP] x c d [SEP]: "c" sits at position 5.
  CHECK(enc.entities[0].span == TokenSpan{5, 6});
  CHECK(enc.layout.n_ent2 == 1);
  const int idx = enc.entity_index(0);
  CHECK(idx == enc.num_tokens() + 1);
  CHECK(enc.token_types[idx] == kTokenTypeEntity);
  CHECK(enc.position_ids[idx] == 5);
}

TEST_CASE("ablation options") {
  Vocabulary v = vocab_for({"a", "b", "c"});
  auto ann = build_annotations({conceptual(1, {0, 0}, "a"), conceptual(2, {2, 2}, "c")}, {});
  EncodingOptions o;
  o.entity_token_types = false;
  o.position_alignment = false;
  EncodedInput enc = assemble_input({"a", "b"}, {"c"}, ann, v, o);
  CHECK(enc.token_types == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1, 1, 1});
  CHECK(enc.position_ids == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("encoding errors") {
  Vocabulary v = vocab_for({"a"});
  auto bad = build_annotations({conceptual(1, {0, 1}, "x")}, {});
  CHECK_THROWS_AS(assemble_input({"a"}, {"a"}, bad, v), EncodingError);
  auto wrong_sentence = build_annotations({conceptual(2, {0, 0}, "x")}, {});
  CHECK_THROWS_AS(assemble_input({"a"}, {"a"}, wrong_sentence, v), EncodingError);
  std::vector<std::string> long_s(126, "a");
  CHECK_THROWS_AS(assemble_input(long_s, {"a"}, {}, v), EncodingError);
  CHECK_NOTHROW(assemble_input(std::vector<std::string>(124, "a"), {"a"}, {}, v));
}

TEST_CASE("entity overflow truncates entities, never tokens") {
  Vocabulary v = vocab_for({"a"});
  std::vector<std::string> s1(20, "a");
  std::vector<Entity> es;
  for (int i = 0; i < 20; ++i) es.push_back(conceptual(1, {i, i}, "e" + std::to_string(i)));
  EncodedInput enc = assemble_input(s1, {"a"}, build_annotations(es, {}), v);
  CHECK(enc.layout.n_ent1 == 16);
  CHECK(enc.truncated_entities == 4);
  CHECK(enc.layout.m == 21);
}

TEST_CASE("missing embeddings use [ENT_UNK] or drop the slot") {
  Vocabulary v = vocab_for({"a", "b"});
  KgEmbeddingTable lex("c", 2);
  lex.insert("a", Vec::Zero(2));
  KgTables tables{&lex, nullptr};
  auto ann = build_annotations({conceptual(1, {0, 0}, "a"), conceptual(1, {1, 1}, "b")}, {});
  EncodedInput enc = assemble_input({"a", "b"}, {"a"}, ann, v, {}, &tables);
  REQUIRE(enc.entities.size() == 2);
  CHECK(enc.entities[0].entity_id == "a");
  CHECK(enc.entities[1].entity_id.empty());
  EncodingOptions drop;
  drop.use_ent_unk = false;
  EncodedInput dropped = assemble_input({"a", "b"}, {"a"}, ann, v, drop, &tables);
  CHECK(dropped.entities.size() == 1);
  CHECK(dropped.truncated_entities == 1);
}

TEST_CASE("layout invariants hold on random records") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    auto rec = testing::random_record(rng, 32, 6);
    std::vector<std::string> words = rec.s1;
    words.insert(words.end(), rec.s2.begin(), rec.s2.end());
    Vocabulary v = vocab_for(words);
    EncodedInput enc = assemble_input(rec.s1, rec.s2, rec.annotations, v);
    const int m = enc.layout.m;
    CHECK(enc.num_tokens() == m + 3);
    CHECK(enc.seq_len() == m + 3 + enc.layout.n_ent1 + enc.layout.n_ent2 + 2);

    std::vector<int> token_pos(enc.position_ids.begin(), enc.position_ids.begin() + m + 3);
    std::sort(token_pos.begin(), token_pos.end());
    for (int i = 0; i <= m + 2; ++i) CHECK(token_pos[i] == i);
    for (int i = m + 3; i < enc.seq_len(); ++i) {
      CHECK(enc.position_ids[i] >= 0);
      CHECK(enc.position_ids[i] <= m + 2);
    }
    for (int i = 0; i < enc.seq_len(); ++i) {
      CHECK((enc.token_types[i] == 2) == (i >= m + 3));
      CHECK(enc.token_types[i] >= 0);
      CHECK(enc.token_types[i] <= 2);
    }
    for (size_t k = 0; k < enc.entities.size(); ++k) {
      const auto &slot = enc.entities[k];
      CHECK(enc.position_ids[enc.entity_index(static_cast<int>(k))] == slot.span.first);
      CHECK(slot.sentence == (k < static_cast<size_t>(enc.layout.n_ent1) ? 1 : 2));
    }

    auto [d1, d2] = decode_tokens(enc, v);
    CHECK(assemble_input(d1, d2, rec.annotations, v) == enc);
  }
}

}  // namespace
}  // namespace ki
