#pragma once

// Corpus representation: label vocabulary, documents, JSON-lines dataset
// files, tweet preprocessing, cross-validation folds and synthetic corpora.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomine/error.hpp"
#include "emomine/rng.hpp"
#include "emomine/stopwords.hpp"

namespace emomine {

using LabelId = int;

/// Sorted, duplicate-free list of label indices.
using LabelSet = std::vector<LabelId>;

inline LabelSet make_label_set(std::vector<LabelId> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

inline bool contains_label(const LabelSet& set, LabelId label) {
  return std::binary_search(set.begin(), set.end(), label);
}

struct EmotionLabel {
  std::string name;
  LabelId index = 0;
  bool operator==(const EmotionLabel&) const = default;
};

/// Ordered registry of emotion label names; indices are positions.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;

  explicit LabelVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const auto& n = names_[i];
      if (n.empty()) throw Error("label names must be non-empty");
      if (std::any_of(n.begin(), n.end(), [](unsigned char c) { return std::isupper(c); })) {
        throw Error("label name must be lowercase: '" + n + "'");
      }
      if (!index_.emplace(n, static_cast<LabelId>(i)).second) {
        throw Error("duplicate label name: '" + n + "'");
      }
    }
  }

  /// The nine basic emotions followed by the seven depression-related ones.
  static LabelVocabulary defaults() {
    return LabelVocabulary({"anger", "fear", "joy", "love", "sadness", "surprise", "thankfulness",
                            "disgust", "guilt", "betrayed", "frustrated", "hopeless", "loneliness",
                            "rejected", "schadenfreude", "self loath"});
  }

  /// First nine entries of defaults().
  static LabelVocabulary basic() {
    auto all = defaults().names();
    all.resize(9);
    return LabelVocabulary(std::move(all));
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(LabelId id) const { return names_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<LabelId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<EmotionLabel> labels() const {
    std::vector<EmotionLabel> out;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      out.push_back({names_[i], static_cast<LabelId>(i)});
    }
    return out;
  }

  bool operator==(const LabelVocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> index_;
};

/// One label name per line.
inline LabelVocabulary load_label_vocabulary(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r\n");
    names.push_back(line.substr(b, e - b + 1));
  }
  return LabelVocabulary(std::move(names));
}

struct Document {
  std::string id;
  std::string raw_text;
  std::vector<std::string> tokens;
  LabelSet labels;
  bool operator==(const Document&) const = default;
};

struct Dataset {
  std::string name;
  LabelVocabulary vocabulary;
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
};

// ---------------------------------------------------------------------------
// Dataset files: one JSON object per line with "text", "labels" and an
// optional "id" (written third). Blank lines are skipped.

inline Dataset parse_dataset(std::istream& in, const LabelVocabulary& vocabulary,
                             std::string name = {}) {
  Dataset ds{std::move(name), vocabulary, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw ParseError("record is not an object", line_no);
    auto text = record.find("text");
    if (text == record.end() || !text->is_string()) {
      throw ParseError("missing string field 'text'", line_no);
    }
    auto labels = record.find("labels");
    if (labels == record.end() || !labels->is_array()) {
      throw ParseError("missing array field 'labels'", line_no);
    }
    if (labels->empty()) throw ParseError("empty label array", line_no);
    std::vector<LabelId> ids;
    for (const auto& l : *labels) {
      if (!l.is_string()) throw ParseError("label entries must be strings", line_no);
      const auto label_name = l.get<std::string>();
      auto id = vocabulary.find(label_name);
      if (!id) throw ParseError("unknown label '" + label_name + "'", line_no);
      ids.push_back(*id);
    }
    Document doc;
    if (auto id = record.find("id"); id != record.end()) {
      if (!id->is_string()) throw ParseError("field 'id' must be a string", line_no);
      doc.id = id->get<std::string>();
    } else {
      doc.id = "doc-" + std::to_string(line_no);
    }
    doc.raw_text = text->get<std::string>();
    doc.labels = make_label_set(std::move(ids));
    ds.documents.push_back(std::move(doc));
  }
  return ds;
}

inline void write_dataset(std::ostream& out, const Dataset& ds) {
  for (const auto& doc : ds.documents) {
    nlohmann::ordered_json record;
    record["text"] = doc.raw_text;
    auto& labels = record["labels"] = nlohmann::ordered_json::array();
    for (LabelId l : doc.labels) labels.push_back(ds.vocabulary.name(l));
    record["id"] = doc.id;
    out << record.dump() << '\n';
  }
}

inline Dataset read_dataset_file(const std::string& path, const LabelVocabulary& vocabulary,
                                 std::string name = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path);
  return parse_dataset(in, vocabulary, name.empty() ? path : std::move(name));
}

inline void write_dataset_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file: " + path);
  write_dataset(out, ds);
}

// ---------------------------------------------------------------------------
// Label lexicon: label name -> hashtags ("#...") and key-phrases.

class LabelLexicon {
 public:
  LabelLexicon() = default;
  explicit LabelLexicon(std::map<std::string, std::vector<std::string>> entries)
      : entries_(std::move(entries)) {
    for (auto& [label, terms] : entries_) {
      for (auto& t : terms) {
        std::transform(t.begin(), t.end(), t.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      }
    }
  }

  /// Hashtags and key-phrases used to collect the seven extended emotions,
  /// plus the hashtags assumed for the nine basic emotions.
  static LabelLexicon defaults() {
    return LabelLexicon({
        {"anger", {"#anger", "#angry", "#rage"}},
        {"fear", {"#fear", "#scared", "#afraid"}},
        {"joy", {"#joy", "#happy", "#happiness"}},
        {"love", {"#love", "#inlove"}},
        {"sadness", {"#sad", "#sadness"}},
        {"surprise", {"#surprise", "#surprised", "#shocked"}},
        {"thankfulness", {"#thankful", "#grateful", "#gratitude"}},
        {"disgust", {"#disgust", "#disgusted", "#gross"}},
        {"guilt", {"#guilt", "#guilty"}},
        {"betrayed", {"#betrayed"}},
        {"frustrated", {"#frustrated", "#frustration"}},
        {"hopeless", {"#hopeless", "#hopelessness", "no hope", "end of everything"}},
        {"loneliness", {"#lonely", "#loner", "i am alone"}},
        {"rejected", {"#rejected", "#rejection", "nobody wants me", "everyone rejects me"}},
        {"schadenfreude", {"#schadenfreude"}},
        {"self loath",
         {"#selfhate", "#ihatemyself", "#ifuckmyself", "i hate myself", "i fuck myself"}},
    });
  }

  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

  std::unordered_set<std::string> hashtags() const {
    std::unordered_set<std::string> out;
    for (const auto& [_, terms] : entries_)
      for (const auto& t : terms)
        if (!t.empty() && t[0] == '#') out.insert(t);
    return out;
  }

  /// Non-hashtag entries, longest first (ties lexicographic).
  std::vector<std::string> key_phrases() const {
    std::set<std::string> uniq;
    for (const auto& [_, terms] : entries_)
      for (const auto& t : terms)
        if (!t.empty() && t[0] != '#') uniq.insert(t);
    std::vector<std::string> out(uniq.begin(), uniq.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return out;
  }

  bool operator==(const LabelLexicon&) const = default;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// Lexicon file: JSON object mapping label name to an array of terms.
inline LabelLexicon parse_lexicon(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed lexicon: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("lexicon must be a JSON object", 0);
  std::map<std::string, std::vector<std::string>> entries;
  for (auto& [label, terms] : j.items()) {
    if (!terms.is_array()) throw ParseError("lexicon entry for '" + label + "' is not an array", 0);
    auto& list = entries[label];
    for (const auto& t : terms) {
      if (!t.is_string()) throw ParseError("lexicon terms must be strings", 0);
      list.push_back(t.get<std::string>());
    }
  }
  return LabelLexicon(std::move(entries));
}

inline void write_lexicon(std::ostream& out, const LabelLexicon& lexicon) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [label, terms] : lexicon.entries()) j[label] = terms;
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Preprocessing

namespace detail {

inline bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

/// Letters, digits, underscore, and any byte of a multi-byte UTF-8 sequence.
inline bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) || c == '_'; }

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

/// Byte length of a Unicode whitespace sequence starting at `i`, or 0.
inline std::size_t whitespace_length(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) -> unsigned char {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0;
  };
  const unsigned char c = b(0);
  if (c == ' ' || (c >= '\t' && c <= '\r')) return 1;
  if (c == 0xC2 && (b(1) == 0x85 || b(1) == 0xA0)) return 2;
  if (c == 0xE1 && b(1) == 0x9A && b(2) == 0x80) return 3;
  if (c == 0xE2 && b(1) == 0x80 && ((b(2) >= 0x80 && b(2) <= 0x8A) || b(2) == 0xA8 ||
                                     b(2) == 0xA9 || b(2) == 0xAF))
    return 3;
  if (c == 0xE2 && b(1) == 0x81 && b(2) == 0x9F) return 3;
  if (c == 0xE3 && b(1) == 0x80 && b(2) == 0x80) return 3;
  return 0;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  std::size_t start = 0;
  bool in_token = false;
  while (i < s.size()) {
    const std::size_t ws = whitespace_length(s, i);
    if (ws) {
      if (in_token) out.emplace_back(s.substr(start, i - start));
      in_token = false;
      i += ws;
    } else {
      if (!in_token) start = i;
      in_token = true;
      ++i;
    }
  }
  if (in_token) out.emplace_back(s.substr(start));
  return out;
}

inline std::string_view strip_punct(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_punct(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_ascii_punct(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace detail

/// Splits a hashtag into lowercase words at case transitions, letter/digit
/// boundaries, underscores and other punctuation.
inline std::vector<std::string> decompose_hashtag(std::string_view tag) {
  while (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  enum class Kind { kSep, kUpper, kLower, kDigit };
  const auto kind = [](unsigned char c) {
    if (c >= 0x80) return Kind::kLower;
    if (std::isupper(c)) return Kind::kUpper;
    if (std::islower(c)) return Kind::kLower;
    if (std::isdigit(c)) return Kind::kDigit;
    return Kind::kSep;
  };
  std::vector<std::string> words;
  std::string cur;
  const auto flush = [&] {
    if (!cur.empty()) words.push_back(detail::ascii_lower(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < tag.size(); ++i) {
    const auto c = static_cast<unsigned char>(tag[i]);
    const Kind k = kind(c);
    if (k == Kind::kSep) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const Kind prev = kind(static_cast<unsigned char>(cur.back()));
      const bool next_lower =
          i + 1 < tag.size() && kind(static_cast<unsigned char>(tag[i + 1])) == Kind::kLower;
      const bool boundary = (prev == Kind::kDigit) != (k == Kind::kDigit) ||
                            (prev == Kind::kLower && k == Kind::kUpper) ||
                            (prev == Kind::kUpper && k == Kind::kUpper && next_lower);
      if (boundary) flush();
    }
    cur.push_back(static_cast<char>(c));
  }
  flush();
  return words;
}

/// Tweet normalizer. Rule order: lowercase, URL -> "url", mention -> "@user",
/// label-hashtag removal then hashtag decomposition, key-phrase removal,
/// punctuation strip at token boundaries, stop-word removal. Hashtag
/// decomposition reads the original casing of the tag.
class Preprocessor {
 public:
  Preprocessor(const LabelLexicon& lexicon, StopWords stopwords)
      : label_tags_(lexicon.hashtags()),
        key_phrases_(lexicon.key_phrases()),
        stopwords_(std::move(stopwords)) {}

  std::vector<std::string> operator()(std::string_view raw) const {
    std::vector<std::string> stage;
    for (const auto& tok : detail::split_whitespace(raw)) {
      std::size_t start = 0;
      while (start < tok.size() && tok[start] != '#' && tok[start] != '@' &&
             detail::is_ascii_punct(static_cast<unsigned char>(tok[start])))
        ++start;
      const std::string_view core = std::string_view(tok).substr(start);
      const std::string lower = detail::ascii_lower(core);
      const bool word_follows =
          core.size() > 1 && detail::is_word_byte(static_cast<unsigned char>(core[1]));
      if (detail::starts_with(lower, "http://") || detail::starts_with(lower, "https://") ||
          detail::starts_with(lower, "www.")) {
        stage.emplace_back("url");
      } else if (lower[0] == '@' && word_follows) {
        stage.emplace_back("@user");
      } else if (lower[0] == '#' && word_follows) {
        std::string_view tag = core;
        while (!tag.empty() && detail::is_ascii_punct(static_cast<unsigned char>(tag.back())))
          tag.remove_suffix(1);
        if (label_tags_.contains(detail::ascii_lower(tag))) continue;
        for (auto& w : decompose_hashtag(tag)) stage.push_back(std::move(w));
      } else {
        stage.push_back(detail::ascii_lower(tok));
      }
    }

    std::string joined;
    for (const auto& t : stage) {
      if (!joined.empty()) joined.push_back(' ');
      joined += t;
    }
    for (const auto& phrase : key_phrases_) remove_phrase(joined, phrase);

    std::vector<std::string> out;
    for (const auto& tok : detail::split_whitespace(joined)) {
      std::string_view t = tok == "@user" ? std::string_view(tok) : detail::strip_punct(tok);
      if (t.empty()) continue;
      std::string word(t);
      if (stopwords_.contains(word)) continue;
      out.push_back(std::move(word));
    }
    return out;
  }

 private:
  static void remove_phrase(std::string& text, const std::string& phrase) {
    if (phrase.empty()) return;
    std::size_t pos = 0;
    while ((pos = text.find(phrase, pos)) != std::string::npos) {
      const std::size_t end = pos + phrase.size();
      const bool left_ok =
          pos == 0 || !detail::is_word_byte(static_cast<unsigned char>(text[pos - 1]));
      const bool right_ok =
          end == text.size() || !detail::is_word_byte(static_cast<unsigned char>(text[end]));
      if (left_ok && right_ok) {
        text.replace(pos, phrase.size(), " ");
        pos += 1;
      } else {
        pos += 1;
      }
    }
  }

  std::unordered_set<std::string> label_tags_;
  std::vector<std::string> key_phrases_;
  StopWords stopwords_;
};

inline std::vector<std::string> preprocess(std::string_view raw, const LabelLexicon& lexicon,
                                           const StopWords& stopwords) {
  return Preprocessor(lexicon, stopwords)(raw);
}

/// Raw text cut off with a trailing ellipsis ("..." or U+2026).
inline bool is_incomplete(std::string_view raw) {
  std::size_t e = raw.size();
  while (e > 0 && (raw[e - 1] == ' ' || (raw[e - 1] >= '\t' && raw[e - 1] <= '\r'))) --e;
  const auto body = raw.substr(0, e);
  return body.ends_with("...") || body.ends_with("\xE2\x80\xA6");
}

struct PrepareStats {
  std::size_t incomplete = 0;
  std::size_t empty = 0;
  std::size_t duplicate = 0;
};

/// Tokenizes every document, then drops incomplete, empty and duplicate
/// (identical token sequence; first occurrence kept) documents.
inline Dataset prepare_dataset(Dataset ds, const Preprocessor& pre, PrepareStats* stats = nullptr) {
  PrepareStats local;
  std::set<std::vector<std::string>> seen;
  std::vector<Document> kept;
  kept.reserve(ds.documents.size());
  for (auto& doc : ds.documents) {
    if (is_incomplete(doc.raw_text)) {
      ++local.incomplete;
      continue;
    }
    doc.tokens = pre(doc.raw_text);
    if (doc.tokens.empty()) {
      ++local.empty;
      continue;
    }
    if (!seen.insert(doc.tokens).second) {
      ++local.duplicate;
      continue;
    }
    kept.push_back(std::move(doc));
  }
  ds.documents = std::move(kept);
  if (stats) *stats = local;
  return ds;
}

// ---------------------------------------------------------------------------
// Cross-validation folds

/// Document positions for one fold.
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;                     // per document: its test fold
  std::vector<std::set<std::string>> validation_ids;  // per fold

  /// Positions are ascending within each part.
  FoldSplit split(const Dataset& ds, int fold) const {
    if (fold < 0 || fold >= k) throw Error("fold index out of range");
    if (ds.documents.size() != assignments.size()) {
      throw Error("fold plan does not match dataset size");
    }
    FoldSplit s;
    const auto& val = validation_ids[static_cast<std::size_t>(fold)];
    for (std::size_t i = 0; i < ds.documents.size(); ++i) {
      if (assignments[i] == fold)
        s.test.push_back(i);
      else if (val.contains(ds.documents[i].id))
        s.validation.push_back(i);
      else
        s.train.push_back(i);
    }
    return s;
  }

  bool operator==(const FoldPlan&) const = default;
};

inline FoldPlan split_folds(const Dataset& ds, int k, double validation_fraction,
                            std::uint64_t seed) {
  if (k < 2) throw Error("fold count must be at least 2");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error("validation fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.documents.size();
  if (n < static_cast<std::size_t>(k)) {
    throw Error("cannot split " + std::to_string(n) + " documents into " + std::to_string(k) +
                " folds");
  }
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(n, 0);
  const auto uk = static_cast<std::size_t>(k);
  for (std::size_t f = 0; f < uk; ++f) {
    for (std::size_t p = f * n / uk; p < (f + 1) * n / uk; ++p) {
      plan.assignments[order[p]] = static_cast<int>(f);
    }
  }
  for (std::size_t f = 0; f < uk; ++f) {
    std::vector<std::size_t> train;
    for (std::size_t p : order)
      if (plan.assignments[p] != static_cast<int>(f)) train.push_back(p);
    rng.shuffle(train);
    const auto n_val = static_cast<std::size_t>(
        std::floor(validation_fraction * static_cast<double>(train.size()) + 0.5));
    std::set<std::string> ids;
    for (std::size_t i = 0; i < n_val && i < train.size(); ++i) {
      ids.insert(ds.documents[train[i]].id);
    }
    plan.validation_ids.push_back(std::move(ids));
  }
  return plan;
}

inline nlohmann::ordered_json to_json(const FoldPlan& plan, const Dataset& ds) {
  nlohmann::ordered_json j;
  j["k"] = plan.k;
  auto& docs = j["assignments"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
    docs.push_back({{"id", ds.documents[i].id}, {"fold", plan.assignments[i]}});
  }
  auto& val = j["validation_ids"] = nlohmann::ordered_json::array();
  for (const auto& ids : plan.validation_ids) val.push_back(ids);
  return j;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SynthSpec {
  std::vector<std::string> label_names;
  std::vector<std::pair<LabelSet, double>> labelset_weights;
  std::vector<std::vector<std::string>> lexicon;  // per label keywords
  std::size_t documents = 200;
  std::size_t min_length = 6;
  std::size_t max_length = 12;
  std::size_t keywords_per_label = 1;
  double noise_rate = 0.5;
  std::size_t noise_vocabulary = 200;

  /// `n_labels` labels named "l0".."l{n-1}" with `keywords` keywords each
  /// ("k{label}w{j}"); weights must be filled in by the caller.
  static SynthSpec keyword_corpus(std::size_t n_labels, std::size_t keywords) {
    SynthSpec s;
    for (std::size_t l = 0; l < n_labels; ++l) {
      s.label_names.push_back("l" + std::to_string(l));
      std::vector<std::string> words;
      for (std::size_t j = 0; j < keywords; ++j) {
        words.push_back("k" + std::to_string(l) + "w" + std::to_string(j));
      }
      s.lexicon.push_back(std::move(words));
    }
    return s;
  }
};

inline std::string noise_word(std::size_t i) { return "n" + std::to_string(i); }

/// Documents hold keywords for each of their labels plus noise words; token
/// sequences are unique. Tokens are stable under the default preprocessor.
inline Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  const std::size_t n_labels = spec.label_names.size();
  if (spec.lexicon.size() != n_labels) throw Error("synthetic lexicon size != label count");
  if (spec.labelset_weights.empty()) throw Error("synthetic spec has no labelset weights");
  if (spec.min_length > spec.max_length) throw Error("min_length exceeds max_length");
  if (spec.noise_rate < 0.0 || spec.noise_rate > 1.0) throw Error("noise_rate outside [0,1]");
  if (spec.noise_rate > 0.0 && spec.noise_vocabulary == 0) {
    throw Error("noise_rate > 0 needs a non-empty noise vocabulary");
  }
  std::vector<double> weights;
  std::vector<LabelSet> sets;
  for (const auto& [set, w] : spec.labelset_weights) {
    if (w < 0.0) throw Error("negative labelset weight");
    auto canon = make_label_set(set);
    if (canon.empty()) throw Error("empty labelset in synthetic spec");
    for (LabelId l : canon) {
      if (l < 0 || static_cast<std::size_t>(l) >= n_labels) throw Error("labelset index out of range");
      if (w > 0.0 && spec.lexicon[static_cast<std::size_t>(l)].empty()) {
        throw Error("empty keyword lexicon for label '" +
                    spec.label_names[static_cast<std::size_t>(l)] + "'");
      }
    }
    sets.push_back(std::move(canon));
    weights.push_back(w);
  }

  Dataset ds{"synthetic", LabelVocabulary(spec.label_names), {}};
  Rng rng(seed);
  std::set<std::vector<std::string>> seen;
  constexpr int kMaxAttempts = 1000;
  for (std::size_t d = 0; d < spec.documents; ++d) {
    const LabelSet& labels = sets[rng.categorical(weights)];
    std::vector<std::string> tokens;
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxAttempts) {
        throw Error("cannot generate a unique synthetic document; widen the lexicon or noise");
      }
      tokens.clear();
      for (LabelId l : labels) {
        const auto& words = spec.lexicon[static_cast<std::size_t>(l)];
        for (std::size_t j = 0; j < spec.keywords_per_label; ++j) {
          tokens.push_back(words[rng.index(words.size())]);
        }
      }
      const std::size_t length =
          spec.min_length + rng.index(spec.max_length - spec.min_length + 1);
      while (tokens.size() < length) {
        if (rng.uniform() < spec.noise_rate) {
          tokens.push_back(noise_word(rng.index(spec.noise_vocabulary)));
        } else {
          const auto& words = spec.lexicon[static_cast<std::size_t>(labels[rng.index(labels.size())])];
          tokens.push_back(words[rng.index(words.size())]);
        }
      }
      rng.shuffle(tokens);
      if (seen.insert(tokens).second) break;
    }
    Document doc;
    doc.id = "syn-" + std::to_string(d);
    for (const auto& t : tokens) {
      if (!doc.raw_text.empty()) doc.raw_text.push_back(' ');
      doc.raw_text += t;
    }
    doc.tokens = std::move(tokens);
    doc.labels = labels;
    ds.documents.push_back(std::move(doc));
  }
  return ds;
}

}  // namespace emomine
