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

#include "ki/selective_attention.h"

namespace ki {

std::string AttentionMask::render() const {
  std::string out;
  out.reserve(static_cast<size_t>(size_) * (size_ + 1));
  for (int i = 0; i < size_; ++i) {
    for (int j = 0; j < size_; ++j) out.push_back(allowed(i, j) ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

AttentionMask build_mask(const EncodedInput &encoded, bool selective) {
  const int size = encoded.seq_len();
  if (!selective) return AttentionMask(size, true);

  AttentionMask mask(size);
  const int tokens = encoded.num_tokens();
  for (int i = 0; i < tokens; ++i) {
    for (int j = 0; j < tokens; ++j) mask.set(i, j, true);
  }

  const int ne = static_cast<int>(encoded.entities.size());
  for (int a = 0; a < ne; ++a) {
    const EntitySlot &ea = encoded.entities[a];
    const int ia = encoded.entity_index(a);
    for (int t = ea.span.first; t <= ea.span.last; ++t) {
      mask.set(t, ia, true);
      mask.set(ia, t, true);
    }
    for (int b = 0; b < ne; ++b) {
      const EntitySlot &eb = encoded.entities[b];
      if (ea.sentence == eb.sentence && ea.etype == eb.etype) {
        mask.set(ia, encoded.entity_index(b), true);
      }
    }
  }
  mask.set(encoded.entity_sep1_index(), encoded.entity_sep1_index(), true);
  mask.set(encoded.entity_sep2_index(), encoded.entity_sep2_index(), true);
  return mask;
}

Mat mask_to_bias(const AttentionMask &mask) {
  const int n = mask.size();
  Mat bias(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) bias(i, j) = mask.allowed(i, j) ? 0.0 : kMaskedBias;
  }
  return bias;
}

}  // namespace ki
