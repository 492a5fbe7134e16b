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

#ifndef KI_SELECTIVE_ATTENTION_H_
#define KI_SELECTIVE_ATTENTION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ki/input_encoding.h"
#include "ki/types.h"

namespace ki {

// Additive bias for a disallowed query/key pair.
inline constexpr double kMaskedBias = -1e9;

// Square boolean matrix over the combined token+entity sequence;
// allowed(i, j) means position i may attend to position j.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(int size, bool fill = false)
      : size_(size), allowed_(static_cast<size_t>(size) * size, fill ? 1 : 0) {}

  int size() const { return size_; }
  bool allowed(int i, int j) const { return allowed_[idx(i, j)] != 0; }
  void set(int i, int j, bool v) { allowed_[idx(i, j)] = v ? 1 : 0; }

  // Rows as 0/1 characters, one line per query position.
  std::string render() const;

  bool operator==(const AttentionMask &) const = default;

 private:
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * size_ + j; }

  int size_ = 0;
  std::vector<uint8_t> allowed_;
};

// Selective attention rules:
//   token-token: always
//   token-entity (both directions): iff the token lies in the entity's span
//   entity-entity: iff same sentence and same entity type
// Entity-segment [SEP]s attend only themselves.
// With `selective` false every position attends every position.
AttentionMask build_mask(const EncodedInput &encoded, bool selective = true);

// 0 where allowed, kMaskedBias elsewhere.
Mat mask_to_bias(const AttentionMask &mask);

}  // namespace ki

#endif  // KI_SELECTIVE_ATTENTION_H_
