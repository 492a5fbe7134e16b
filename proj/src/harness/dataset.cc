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

#include "ki/harness/dataset.h"

#include <fstream>

#include "ki/errors.h"

namespace ki {

nlohmann::json record_to_json(const Record &r) {
  nlohmann::json ents = nlohmann::json::array();
  for (const RecordEntity &e : r.entities) {
    nlohmann::json o{{"sentence", e.sentence},
                     {"token_span", {e.span.first, e.span.last}},
                     {"etype", entity_type_name(e.etype)},
                     {"id", e.id}};
    if (e.sense_id) o["sense_id"] = *e.sense_id;
    ents.push_back(std::move(o));
  }
  return nlohmann::json{{"sentence1", r.sentence1},
                        {"sentence2", r.sentence2},
                        {"label", r.label},
                        {"entities", std::move(ents)}};
}

Record record_from_json(const nlohmann::json &j) {
  Record r;
  try {
    r.sentence1 = j.at("sentence1").get<std::string>();
    r.sentence2 = j.at("sentence2").get<std::string>();
    r.label = j.at("label").get<int>();
    if (j.contains("entities")) {
      for (const auto &o : j.at("entities")) {
        RecordEntity e;
        e.sentence = o.at("sentence").get<int>();
        const auto &span = o.at("token_span");
        if (!span.is_array() || span.size() != 2) {
          throw ParseError("token_span must be [start, end]");
        }
        e.span = {span[0].get<int>(), span[1].get<int>()};
        const std::string t = o.at("etype").get<std::string>();
        if (t == "conceptual") {
          e.etype = EntityType::kConceptual;
        } else if (t == "ambiguous") {
          e.etype = EntityType::kAmbiguous;
        } else {
          throw ParseError("unknown etype '" + t + "'");
        }
        e.id = o.at("id").get<std::string>();
        if (o.contains("sense_id") && !o.at("sense_id").is_null()) {
          e.sense_id = o.at("sense_id").get<std::string>();
        }
        r.entities.push_back(std::move(e));
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("bad record: ") + e.what());
  }
  return r;
}

std::vector<Record> read_jsonl(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError &e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path &path, const std::vector<Record> &records) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  for (const Record &r : records) out << record_to_json(r).dump() << '\n';
}

void save_dataset_dir(const std::filesystem::path &dir, const Dataset &data,
                      const Resources &res) {
  std::filesystem::create_directories(dir);
  write_jsonl(dir / "train.jsonl", data.train);
  write_jsonl(dir / "dev.jsonl", data.dev);
  write_jsonl(dir / "test.jsonl", data.test);
  res.vocab.save(dir / "vocab.txt");
  save_lexicon(res.conceptual, dir / "conceptual.tsv");
  save_lexicon(res.ambiguous, dir / "ambiguous.tsv");
}

std::pair<Dataset, Resources> load_dataset_dir(const std::filesystem::path &dir) {
  for (const char *f : {"train.jsonl", "dev.jsonl", "test.jsonl", "vocab.txt",
                        "conceptual.tsv", "ambiguous.tsv"}) {
    if (!std::filesystem::exists(dir / f)) {
      throw ConfigError("dataset directory " + dir.string() + " lacks " + f);
    }
  }
  Dataset d{read_jsonl(dir / "train.jsonl"), read_jsonl(dir / "dev.jsonl"),
            read_jsonl(dir / "test.jsonl")};
  Resources r{Vocabulary::load(dir / "vocab.txt"),
              load_lexicon(dir / "conceptual.tsv", std::nullopt, "conceptual"),
              load_lexicon(dir / "ambiguous.tsv", std::nullopt, "ambiguous")};
  return {std::move(d), std::move(r)};
}

EncodedInput encode_record(const Record &r, const Resources &res, const EncodingOptions &options,
                           const RecordEntityFilter &keep) {
  const std::vector<std::string> t1 = tokenize(r.sentence1, res.vocab);
  const std::vector<std::string> t2 = tokenize(r.sentence2, res.vocab);
  const int n = static_cast<int>(t1.size());
  std::vector<Entity> conceptual;
  std::vector<SenseTag> tags;
  for (const RecordEntity &e : r.entities) {
    if (keep && !keep(e)) continue;
    if (e.sentence != 1 && e.sentence != 2) {
      throw AnnotationError("entity '" + e.id + "' has sentence " + std::to_string(e.sentence));
    }
    if (e.etype == EntityType::kConceptual) {
      Entity c;
      c.surface = e.id;
      c.normalized_id = normalize_entity(e.id);
      c.sentence = e.sentence;
      c.etype = EntityType::kConceptual;
      const int off = e.sentence == 1 ? 0 : n;
      c.span = {e.span.first + off, e.span.last + off};
      conceptual.push_back(std::move(c));
    } else {
      if (!e.sense_id) throw AnnotationError("ambiguous entity '" + e.id + "' lacks sense_id");
      tags.push_back({e.sentence, e.span, *e.sense_id});
    }
  }
  AmbiguousResult amb = extract_ambiguous(t1, t2, tags, res.ambiguous);
  EntityAnnotations ann = build_annotations(std::move(conceptual), std::move(amb.entities));
  const KgTables tables = res.tables();
  return assemble_input(t1, t2, ann, res.vocab, options, &tables);
}

std::vector<Example> encode_records(const std::vector<Record> &records, const Resources &res,
                                    const EncodingOptions &options) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const Record &r : records) out.push_back({encode_record(r, res, options), r.label});
  return out;
}

}  // namespace ki
