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

#include "ki/harness/task.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "ki/errors.h"
#include "ki/harness/json_util.h"
#include "ki/knowledge_projection.h"

namespace ki {

namespace {

constexpr const char *kFiller[] = {
    "the",    "a",       "of",     "near",    "with",   "about",  "report", "study",
    "shows",  "between", "found",  "in",      "that",   "and",    "some",   "notes",
    "links",  "their",   "this",   "we",      "observe", "claims", "from",   "new",
    "data",   "on",      "its",    "recent",  "paper",  "says",   "under",  "both",
    "given",  "early",   "work",   "several", "cases",  "across", "field",  "theory",
    "method", "each",    "review", "system",  "large",  "small",  "model",  "view",
};
constexpr const char *kAmbiguous[] = {"bank", "bass",  "bat",    "crane", "drain", "match",
                                      "pitch", "seal", "spring", "bark",  "club",  "pen"};
constexpr const char *kCuePositive = "alike";
constexpr const char *kCueNegative = "unlike";
constexpr const char *kRelation = "related_to";

constexpr const char *kOnsets[] = {"b", "d",  "f",  "g",  "k",  "l", "m", "n", "p",
                                   "r", "s",  "t",  "v",  "z",  "br", "kl", "tr", "sk"};
constexpr const char *kNuclei[] = {"a", "e", "i", "o", "u"};
constexpr const char *kCodas[] = {"", "n", "r", "x", "l"};
constexpr int kSyllables = 48;

template <typename T>
const T &pick(const std::vector<T> &v, std::mt19937_64 &rng) {
  return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
}

int uniform(int lo, int hi, std::mt19937_64 &rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string join(const std::vector<std::string> &words) {
  std::string s;
  for (const auto &w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

struct Planted {
  std::vector<std::string> words;
  int entity_word = 0;  // first word of the entity surface
  int ambiguous_word = -1;
  std::string sense;
};

class Generator {
 public:
  explicit Generator(const TaskSpec &spec) : spec_(spec), rng_(spec.seed) {}

  SyntheticTask run() {
    SyntheticTask task;
    make_words();
    make_entities(task);
    make_vocab(task);
    make_lexicons(task);
    split_pools(task);
    for (auto *split : {&task.data.train, &task.data.dev, &task.data.test}) {
      const bool is_train = split == &task.data.train;
      const int size = is_train                         ? spec_.train_size
                       : split == &task.data.dev ? spec_.dev_size
                                                 : spec_.test_size;
      *split = make_split(task, size, is_train);
    }
    return task;
  }

 private:
  void make_words() {
    filler_.assign(std::begin(kFiller), std::begin(kFiller) + spec_.filler_words);
    ambiguous_.assign(std::begin(kAmbiguous), std::begin(kAmbiguous) + spec_.ambiguous_words);
    std::vector<std::string> all;
    for (const char *o : kOnsets) {
      for (const char *n : kNuclei) {
        for (const char *c : kCodas) all.push_back(std::string(o) + n + c);
      }
    }
    std::shuffle(all.begin(), all.end(), rng_);
    syllables_.assign(all.begin(), all.begin() + kSyllables);
  }

  std::string nonsense_word() {
    return pick(syllables_, rng_) + pick(syllables_, rng_);
  }

  void make_entities(SyntheticTask &task) {
    std::set<std::string> taken(filler_.begin(), filler_.end());
    taken.insert(ambiguous_.begin(), ambiguous_.end());
    taken.insert({kCuePositive, kCueNegative});
    std::set<std::string> used_ids;
    for (int c = 0; c < spec_.num_clusters; ++c) {
      for (int i = 0; i < spec_.entities_per_cluster; ++i) {
        std::string w1, w2, id;
        do {
          w1 = nonsense_word();
          w2 = nonsense_word();
          id = normalize_entity(w1 + " " + w2);
        } while (taken.count(w1) || taken.count(w2) || used_ids.count(id));
        used_ids.insert(id);
        task.kg.entities.push_back(id);
        task.cluster.push_back(c);
        surfaces_.push_back({w1, w2});
      }
    }
    task.kg.relations = {kRelation};
    const int n = static_cast<int>(task.kg.entities.size());
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b && task.cluster[a] == task.cluster[b]) task.kg.triples.push_back({a, 0, b});
      }
    }
    task.kg.validate();
  }

  void make_vocab(SyntheticTask &task) {
    std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[ENT_UNK]"};
    std::set<std::string> seen(tokens.begin(), tokens.end());
    auto add = [&](const std::string &t) {
      if (seen.insert(t).second) tokens.push_back(t);
    };
    for (const auto &w : filler_) add(w);
    for (const auto &w : ambiguous_) add(w);
    add(kCuePositive);
    add(kCueNegative);
    for (const auto &s : syllables_) add(s);
    for (const auto &s : syllables_) add("##" + s);
    for (char c = 'a'; c <= 'z'; ++c) add(std::string(1, c));
    for (char c = 'a'; c <= 'z'; ++c) add("##" + std::string(1, c));
    task.resources.vocab = Vocabulary(tokens);
  }

  void make_lexicons(SyntheticTask &task) {
    TransEConfig tc;
    tc.dim = spec_.kg_dim;
    tc.epochs = spec_.transe_epochs;
    tc.seed = spec_.seed * 1000003ULL + 17;
    TransEModel transe = train_toy_transe(task.kg, tc);
    task.transe_hits_at_1 = hits_at_1(transe, task.kg);

    std::mt19937_64 ext(spec_.seed * 2654435761ULL + 5);
    std::normal_distribution<double> noise(0.0, spec_.external_scale);
    task.resources.conceptual = KgEmbeddingTable("conceptual", spec_.kg_dim + spec_.external_dim);
    for (size_t i = 0; i < task.kg.entities.size(); ++i) {
      Vec e(spec_.external_dim);
      for (int k = 0; k < spec_.external_dim; ++k) e[k] = noise(ext);
      task.resources.conceptual.insert(task.kg.entities[i],
                                       concat_external(transe.entities.vector(i), e));
    }
    std::normal_distribution<double> unit(0.0, 1.0);
    task.resources.ambiguous = KgEmbeddingTable("ambiguous", spec_.sense_dim);
    for (const auto &w : ambiguous_) {
      for (int s = 1; s <= spec_.senses_per_word; ++s) {
        Vec v(spec_.sense_dim);
        for (int k = 0; k < spec_.sense_dim; ++k) v[k] = unit(ext);
        task.resources.ambiguous.insert(w + "%" + std::to_string(s), v);
      }
    }
  }

  void split_pools(const SyntheticTask &task) {
    const int k = spec_.num_clusters;
    train_pool_.assign(k, {});
    eval_pool_.assign(k, {});
    for (int c = 0; c < k; ++c) {
      std::vector<int> members;
      for (size_t i = 0; i < task.cluster.size(); ++i) {
        if (task.cluster[i] == c) members.push_back(static_cast<int>(i));
      }
      if (spec_.signal != SignalPlacement::kKgOnly) {
        train_pool_[c] = eval_pool_[c] = members;
        continue;
      }
      std::shuffle(members.begin(), members.end(), rng_);
      const int held = held_out_count();
      eval_pool_[c].assign(members.begin(), members.begin() + held);
      train_pool_[c].assign(members.begin() + held, members.end());
      std::sort(eval_pool_[c].begin(), eval_pool_[c].end());
      std::sort(train_pool_[c].begin(), train_pool_[c].end());
    }
  }

  int held_out_count() const {
    return static_cast<int>(std::lround(spec_.entities_per_cluster * spec_.held_out_fraction));
  }

  Planted sentence(int entity, bool cue, int label) {
    Planted p;
    const int fillers = uniform(spec_.min_filler, spec_.max_filler, rng_);
    for (int i = 0; i < fillers; ++i) p.words.push_back(pick(filler_, rng_));
    const bool ambiguous = !ambiguous_.empty() &&
                           std::bernoulli_distribution(spec_.ambiguous_rate)(rng_);
    if (ambiguous) {
      const int at = uniform(0, static_cast<int>(p.words.size()), rng_);
      const std::string &w = pick(ambiguous_, rng_);
      p.words.insert(p.words.begin() + at, w);
      p.ambiguous_word = at;
      p.sense = w + "%" + std::to_string(uniform(1, spec_.senses_per_word, rng_));
    }
    if (cue) {
      const int at = uniform(0, static_cast<int>(p.words.size()), rng_);
      p.words.insert(p.words.begin() + at, label == 1 ? kCuePositive : kCueNegative);
      if (p.ambiguous_word >= at) ++p.ambiguous_word;
    }
    const int at = uniform(0, static_cast<int>(p.words.size()), rng_);
    p.words.insert(p.words.begin() + at, surfaces_[entity].second);
    p.words.insert(p.words.begin() + at, surfaces_[entity].first);
    p.entity_word = at;
    if (p.ambiguous_word >= at) p.ambiguous_word += 2;
    return p;
  }

  // Word index -> first subword index, plus the total at the end.
  std::vector<int> word_offsets(const std::vector<std::string> &words, const Vocabulary &v) {
    std::vector<int> off = {0};
    for (const auto &w : words) {
      off.push_back(off.back() + static_cast<int>(tokenize(w, v).size()));
    }
    return off;
  }

  Record annotate(const SyntheticTask &task, const Planted &p1, const Planted &p2, int label,
                  int e1, int e2) {
    const Vocabulary &v = task.resources.vocab;
    Record r;
    r.sentence1 = join(p1.words);
    r.sentence2 = join(p2.words);
    r.label = label;
    const auto t1 = tokenize(r.sentence1, v);
    const auto t2 = tokenize(r.sentence2, v);
    const int n = static_cast<int>(t1.size());
    // The gazetteer is the annotator; the planted entities must come back.
    std::vector<Entity> found = extract_conceptual(t1, t2, task.resources.conceptual, v);
    if (found.size() != 2 || found[0].normalized_id != task.kg.entities[e1] ||
        found[1].normalized_id != task.kg.entities[e2]) {
      throw std::logic_error("synthetic annotation mismatch in '" + r.sentence1 + " | " +
                             r.sentence2 + "'");
    }
    for (const Entity &e : found) {
      const int off = e.sentence == 1 ? 0 : n;
      r.entities.push_back({e.sentence,
                            {e.span.first - off, e.span.last - off},
                            EntityType::kConceptual,
                            e.normalized_id,
                            std::nullopt});
    }
    int sentence = 1;
    for (const Planted *p : {&p1, &p2}) {
      if (p->ambiguous_word >= 0) {
        const auto off = word_offsets(p->words, v);
        r.entities.push_back({sentence,
                              {off[p->ambiguous_word], off[p->ambiguous_word + 1] - 1},
                              EntityType::kAmbiguous,
                              p->words[p->ambiguous_word],
                              p->sense});
      }
      ++sentence;
    }
    return r;
  }

  std::vector<Record> make_split(const SyntheticTask &task, int size, bool is_train) {
    const auto &pool = is_train ? train_pool_ : eval_pool_;
    const int k = spec_.num_clusters;
    std::vector<Record> out;
    while (static_cast<int>(out.size()) < size) {
      const int label = static_cast<int>(out.size() % 2);
      int e1, e2;
      bool cue = false;
      if (spec_.signal == SignalPlacement::kTextOnly) {
        e1 = pick(pool[uniform(0, k - 1, rng_)], rng_);
        e2 = pick(pool[uniform(0, k - 1, rng_)], rng_);
        cue = true;
      } else if (spec_.label_rule == LabelRule::kFirstCluster) {
        const int c1 = label == 1 ? 0 : uniform(1, k - 1, rng_);
        e1 = pick(pool[c1], rng_);
        do {
          e2 = pick(pool[uniform(0, k - 1, rng_)], rng_);
        } while (e2 == e1);
        cue = spec_.signal == SignalPlacement::kMixed &&
              std::bernoulli_distribution(spec_.cue_rate)(rng_);
      } else {
        const int c1 = uniform(0, k - 1, rng_);
        int c2 = c1;
        if (label == 0) {
          c2 = uniform(0, k - 2, rng_);
          if (c2 >= c1) ++c2;
        }
        e1 = pick(pool[c1], rng_);
        do {
          e2 = pick(pool[c2], rng_);
        } while (e2 == e1);
        cue = spec_.signal == SignalPlacement::kMixed &&
              std::bernoulli_distribution(spec_.cue_rate)(rng_);
      }
      Planted p1 = sentence(e1, false, label);
      Planted p2 = sentence(e2, cue, label);
      const std::string key = join(p1.words) + "\t" + join(p2.words);
      if (!texts_.insert(key).second) continue;
      out.push_back(annotate(task, p1, p2, label, e1, e2));
    }
    std::shuffle(out.begin(), out.end(), rng_);
    return out;
  }

  const TaskSpec &spec_;
  std::mt19937_64 rng_;
  std::vector<std::string> filler_, ambiguous_, syllables_;
  std::vector<std::pair<std::string, std::string>> surfaces_;
  std::vector<std::vector<int>> train_pool_, eval_pool_;
  std::set<std::string> texts_;
};

}  // namespace

const char *signal_name(SignalPlacement s) {
  switch (s) {
    case SignalPlacement::kKgOnly:
      return "kg_only";
    case SignalPlacement::kTextOnly:
      return "text_only";
    case SignalPlacement::kMixed:
      return "mixed";
  }
  return "?";
}

SignalPlacement parse_signal(const std::string &name) {
  if (name == "kg_only") return SignalPlacement::kKgOnly;
  if (name == "text_only") return SignalPlacement::kTextOnly;
  if (name == "mixed") return SignalPlacement::kMixed;
  throw ConfigError("unknown signal placement '" + name + "'");
}

const char *label_rule_name(LabelRule r) {
  return r == LabelRule::kSameCluster ? "same_cluster" : "first_cluster";
}

LabelRule parse_label_rule(const std::string &name) {
  if (name == "same_cluster") return LabelRule::kSameCluster;
  if (name == "first_cluster") return LabelRule::kFirstCluster;
  throw ConfigError("unknown label rule '" + name + "'");
}

void TaskSpec::validate() const {
  auto positive = [](int v, const char *what) {
    if (v <= 0) throw ConfigError(std::string("task.") + what + " must be positive");
  };
  auto fraction = [](double v, const char *what) {
    if (!(v >= 0 && v <= 1)) throw ConfigError(std::string("task.") + what + " must lie in [0, 1]");
  };
  if (num_classes != 2) throw ConfigError("task.num_classes: the generator is binary");
  if (num_clusters < 2) throw ConfigError("task.num_clusters must be at least 2");
  positive(entities_per_cluster, "entities_per_cluster");
  positive(train_size, "train_size");
  positive(dev_size, "dev_size");
  positive(test_size, "test_size");
  positive(kg_dim, "kg_dim");
  positive(sense_dim, "sense_dim");
  positive(transe_epochs, "transe_epochs");
  positive(senses_per_word, "senses_per_word");
  if (external_dim < 0) throw ConfigError("task.external_dim must be non-negative");
  if (!(external_scale >= 0)) throw ConfigError("task.external_scale must be non-negative");
  fraction(held_out_fraction, "held_out_fraction");
  fraction(cue_rate, "cue_rate");
  fraction(ambiguous_rate, "ambiguous_rate");
  const int max_filler_words = static_cast<int>(std::size(kFiller));
  if (filler_words < 1 || filler_words > max_filler_words) {
    throw ConfigError("task.filler_words must lie in [1, " + std::to_string(max_filler_words) +
                      "]");
  }
  const int max_ambiguous = static_cast<int>(std::size(kAmbiguous));
  if (ambiguous_words < 0 || ambiguous_words > max_ambiguous) {
    throw ConfigError("task.ambiguous_words must lie in [0, " + std::to_string(max_ambiguous) +
                      "]");
  }
  if (min_filler < 0 || max_filler < min_filler) {
    throw ConfigError("task.min_filler/max_filler must satisfy 0 <= min <= max");
  }
  const int held = static_cast<int>(std::lround(entities_per_cluster * held_out_fraction));
  if (signal == SignalPlacement::kKgOnly && (held < 2 || entities_per_cluster - held < 2)) {
    throw ConfigError("task: kg_only needs at least 2 training and 2 held-out entities per cluster");
  }
  if (entities_per_cluster < 2) throw ConfigError("task.entities_per_cluster must be at least 2");
}

nlohmann::json TaskSpec::to_json() const {
  return nlohmann::json{
      {"name", name},
      {"signal", signal_name(signal)},
      {"label_rule", label_rule_name(label_rule)},
      {"num_classes", num_classes},
      {"num_clusters", num_clusters},
      {"entities_per_cluster", entities_per_cluster},
      {"held_out_fraction", held_out_fraction},
      {"cue_rate", cue_rate},
      {"filler_words", filler_words},
      {"min_filler", min_filler},
      {"max_filler", max_filler},
      {"ambiguous_words", ambiguous_words},
      {"senses_per_word", senses_per_word},
      {"ambiguous_rate", ambiguous_rate},
      {"kg_dim", kg_dim},
      {"external_dim", external_dim},
      {"external_scale", external_scale},
      {"sense_dim", sense_dim},
      {"transe_epochs", transe_epochs},
      {"train_size", train_size},
      {"dev_size", dev_size},
      {"test_size", test_size},
      {"seed", seed},
  };
}

TaskSpec TaskSpec::from_json(const nlohmann::json &j) {
  TaskSpec s;
  SectionReader r(j, "task");
  r.get("name", s.name);
  std::string signal = signal_name(s.signal);
  if (r.get("signal", signal)) s.signal = parse_signal(signal);
  std::string rule = label_rule_name(s.label_rule);
  if (r.get("label_rule", rule)) s.label_rule = parse_label_rule(rule);
  r.get("num_classes", s.num_classes);
  r.get("num_clusters", s.num_clusters);
  r.get("entities_per_cluster", s.entities_per_cluster);
  r.get("held_out_fraction", s.held_out_fraction);
  r.get("cue_rate", s.cue_rate);
  r.get("filler_words", s.filler_words);
  r.get("min_filler", s.min_filler);
  r.get("max_filler", s.max_filler);
  r.get("ambiguous_words", s.ambiguous_words);
  r.get("senses_per_word", s.senses_per_word);
  r.get("ambiguous_rate", s.ambiguous_rate);
  r.get("kg_dim", s.kg_dim);
  r.get("external_dim", s.external_dim);
  r.get("external_scale", s.external_scale);
  r.get("sense_dim", s.sense_dim);
  r.get("transe_epochs", s.transe_epochs);
  r.get("train_size", s.train_size);
  r.get("dev_size", s.dev_size);
  r.get("test_size", s.test_size);
  r.get("seed", s.seed);
  r.finish();
  return s;
}

SyntheticTask generate_synthetic_dataset(const TaskSpec &spec) {
  spec.validate();
  return Generator(spec).run();
}

}  // namespace ki
