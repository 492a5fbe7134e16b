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

#ifndef KI_HARNESS_DATASET_H_
#define KI_HARNESS_DATASET_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ki/encoder.h"
#include "ki/entity_extraction.h"
#include "ki/input_encoding.h"
#include "ki/kg_store.h"
#include "ki/vocabulary.h"

namespace ki {

// One annotation as stored in the dataset. `span` is inclusive and indexes
// the subword tokens of its own sentence.
struct RecordEntity {
  int sentence = 1;
  TokenSpan span;
  EntityType etype = EntityType::kConceptual;
  std::string id;
  std::optional<std::string> sense_id;

  bool operator==(const RecordEntity &) const = default;
};

struct Record {
  std::string sentence1;
  std::string sentence2;
  int label = 0;
  std::vector<RecordEntity> entities;

  bool operator==(const Record &) const = default;
};

nlohmann::json record_to_json(const Record &r);
// Throws ParseError on missing or mistyped fields.
Record record_from_json(const nlohmann::json &j);

// One JSON object per line; blank lines are skipped. Errors name path:line.
std::vector<Record> read_jsonl(const std::filesystem::path &path);
void write_jsonl(const std::filesystem::path &path, const std::vector<Record> &records);

// Everything a model run needs besides the records.
struct Resources {
  Vocabulary vocab;
  KgEmbeddingTable conceptual;  // entity lexicon
  KgEmbeddingTable ambiguous;   // sense lexicon

  KgTables tables() const { return KgTables{&conceptual, &ambiguous}; }
};

struct Dataset {
  std::vector<Record> train, dev, test;
};

// Directory layout written by gen-data.
void save_dataset_dir(const std::filesystem::path &dir, const Dataset &data,
                      const Resources &res);
// Throws ConfigError when a required file is missing.
std::pair<Dataset, Resources> load_dataset_dir(const std::filesystem::path &dir);

using RecordEntityFilter = std::function<bool(const RecordEntity &)>;

// Tokenizes both sentences and assembles the model input from the stored
// annotations that pass `keep` (all of them when empty).
EncodedInput encode_record(const Record &r, const Resources &res, const EncodingOptions &options,
                           const RecordEntityFilter &keep = {});

std::vector<Example> encode_records(const std::vector<Record> &records, const Resources &res,
                                    const EncodingOptions &options);

}  // namespace ki

#endif  // KI_HARNESS_DATASET_H_
