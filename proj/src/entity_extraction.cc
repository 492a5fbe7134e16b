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

#include "ki/entity_extraction.h"

#include <algorithm>
#include <tuple>

#include "ki/errors.h"

namespace ki {

size_t EntityAnnotations::count(int sentence) const {
  return static_cast<size_t>(std::count_if(
      entities.begin(), entities.end(),
      [&](const Entity &e) { return e.sentence == sentence; }));
}

namespace {

bool is_continuation(const std::string &token) {
  return token.rfind(kContinuation, 0) == 0;
}

void match_sentence(const std::vector<std::string> &tokens, int sentence,
                    int offset, const KgEmbeddingTable &lexicon,
                    const Vocabulary &vocab, int max_ngram,
                    std::vector<Entity> &out) {
  const int n = static_cast<int>(tokens.size());
  struct Candidate {
    int start;
    int len;
    std::string surface;
  };
  std::vector<Candidate> candidates;
  for (int start = 0; start < n; ++start) {
    if (is_continuation(tokens[start])) continue;
    for (int len = 1; len <= max_ngram && start + len <= n; ++len) {
      const int end = start + len;
      if (end < n && is_continuation(tokens[end])) continue;
      std::string surface = detokenize(
          std::vector<std::string>(tokens.begin() + start, tokens.begin() + end));
      if (!lexicon.contains(surface)) continue;
      if (len == 1 && vocab.contains(tokens[start])) continue;
      candidates.push_back({start, len, std::move(surface)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &a, const Candidate &b) {
                     return std::tie(b.len, a.start) < std::tie(a.len, b.start);
                   });

  std::vector<Entity> accepted;
  for (auto &c : candidates) {
    TokenSpan span{offset + c.start, offset + c.start + c.len - 1};
    bool clash = std::any_of(accepted.begin(), accepted.end(),
                             [&](const Entity &e) { return e.span.overlaps(span); });
    if (clash) continue;
    Entity e;
    e.normalized_id = normalize_entity(c.surface);
    e.surface = std::move(c.surface);
    e.span = span;
    e.sentence = sentence;
    e.etype = EntityType::kConceptual;
    accepted.push_back(std::move(e));
  }
  std::sort(accepted.begin(), accepted.end(), [](const Entity &a, const Entity &b) {
    return a.span.first < b.span.first;
  });
  for (auto &e : accepted) out.push_back(std::move(e));
}

}  // namespace

std::vector<Entity> extract_conceptual(const std::vector<std::string> &tokens_s1,
                                       const std::vector<std::string> &tokens_s2,
                                       const KgEmbeddingTable &lexicon,
                                       const Vocabulary &model_vocab,
                                       int max_ngram) {
  if (max_ngram < 1) throw ConfigError("max_ngram must be at least 1");
  std::vector<Entity> out;
  if (lexicon.empty()) return out;
  match_sentence(tokens_s1, 1, 0, lexicon, model_vocab, max_ngram, out);
  match_sentence(tokens_s2, 2, static_cast<int>(tokens_s1.size()), lexicon,
                 model_vocab, max_ngram, out);
  return out;
}

AmbiguousResult extract_ambiguous(const std::vector<std::string> &tokens_s1,
                                  const std::vector<std::string> &tokens_s2,
                                  const std::vector<SenseTag> &sense_tags,
                                  const KgEmbeddingTable &sense_lexicon,
                                  const std::string &record_id) {
  AmbiguousResult result;
  const int n1 = static_cast<int>(tokens_s1.size());
  for (const SenseTag &tag : sense_tags) {
    if (tag.sentence != 1 && tag.sentence != 2) {
      throw AnnotationError("record " + record_id + ": sense tag sentence must be 1 or 2");
    }
    const auto &tokens = tag.sentence == 1 ? tokens_s1 : tokens_s2;
    if (tag.span.first < 0 || tag.span.last < tag.span.first ||
        tag.span.last >= static_cast<int>(tokens.size())) {
      throw AnnotationError("record " + record_id + ": sense tag span [" +
                            std::to_string(tag.span.first) + "," +
                            std::to_string(tag.span.last) + "] out of range for sentence " +
                            std::to_string(tag.sentence));
    }
    if (!sense_lexicon.contains(tag.sense_id)) {
      ++result.dropped;
      continue;
    }
    const int offset = tag.sentence == 1 ? 0 : n1;
    Entity e;
    e.surface = detokenize(std::vector<std::string>(
        tokens.begin() + tag.span.first, tokens.begin() + tag.span.last + 1));
    e.normalized_id = normalize_entity(tag.sense_id);
    e.span = {offset + tag.span.first, offset + tag.span.last};
    e.sentence = tag.sentence;
    e.etype = EntityType::kAmbiguous;
    e.sense_id = tag.sense_id;
    result.entities.push_back(std::move(e));
  }
  return result;
}

EntityAnnotations build_annotations(std::vector<Entity> conceptual,
                                    std::vector<Entity> ambiguous) {
  EntityAnnotations ann;
  ann.entities = std::move(conceptual);
  for (auto &e : ambiguous) ann.entities.push_back(std::move(e));

  for (const Entity &e : ann.entities) {
    if (e.span.first < 0 || e.span.last < e.span.first) {
      throw AnnotationError("entity '" + e.surface + "' has an invalid span");
    }
    if (e.sentence != 1 && e.sentence != 2) {
      throw AnnotationError("entity '" + e.surface + "' has sentence " +
                            std::to_string(e.sentence));
    }
    if ((e.etype == EntityType::kAmbiguous) != e.sense_id.has_value()) {
      throw AnnotationError("entity '" + e.surface +
                            "': sense_id must be present exactly for ambiguous entities");
    }
  }
  for (size_t i = 0; i < ann.entities.size(); ++i) {
    for (size_t j = i + 1; j < ann.entities.size(); ++j) {
      const Entity &a = ann.entities[i];
      const Entity &b = ann.entities[j];
      if (a.etype != b.etype) continue;
      if (a.span.contains(b.span) || b.span.contains(a.span)) {
        throw AnnotationError("entities '" + a.surface + "' and '" + b.surface +
                              "' of the same type have nested spans");
      }
    }
  }

  std::stable_sort(ann.entities.begin(), ann.entities.end(),
                   [](const Entity &a, const Entity &b) {
                     return std::tuple(a.sentence, a.span.first,
                                       static_cast<int>(a.etype), a.span.last) <
                            std::tuple(b.sentence, b.span.first,
                                       static_cast<int>(b.etype), b.span.last);
                   });
  return ann;
}

}  // namespace ki
