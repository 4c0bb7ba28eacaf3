#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "emomine/corpus.hpp"
#include "emomine/stopwords.hpp"

using namespace emomine;

namespace {

Dataset parse(const std::string& text, const LabelVocabulary& v = LabelVocabulary::defaults()) {
  std::istringstream in(text);
  return parse_dataset(in, v, "t");
}

std::vector<std::string> pre(std::string_view raw) {
  return preprocess(raw, LabelLexicon::defaults(), default_stopwords());
}

Dataset numbered(std::size_t n) {
  Dataset ds{"n", LabelVocabulary::basic(), {}};
  for (std::size_t i = 0; i < n; ++i) ds.documents.push_back({"d" + std::to_string(i), "", {"w"}, {0}});
  return ds;
}

}  // namespace

TEST(LabelVocabulary, DefaultsHoldSixteenLabels) {
  const auto v = LabelVocabulary::defaults();
  ASSERT_EQ(v.size(), 16u);
  EXPECT_EQ(v.name(0), "anger");
  EXPECT_EQ(*v.find("self loath"), 15);
  EXPECT_EQ(LabelVocabulary::basic().size(), 9u);
  const auto labels = v.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(labels[i].index, static_cast<LabelId>(i));
}

TEST(LabelVocabulary, RejectsDuplicatesAndUppercase) {
  EXPECT_THROW(LabelVocabulary({"joy", "joy"}), Error);
  EXPECT_THROW(LabelVocabulary({"Joy"}), Error);
}

TEST(ParseDataset, MapsFields) {
  const auto ds = parse(R"({"text":"I hate myself","labels":["self loath"]})");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.documents[0].raw_text, "I hate myself");
  EXPECT_EQ(ds.documents[0].labels, LabelSet{15});
  EXPECT_TRUE(ds.documents[0].tokens.empty());
}

TEST(ParseDataset, RepeatedLabelCollapses) {
  const auto ds = parse(R"({"text":"x","labels":["joy","joy"]})");
  EXPECT_EQ(ds.documents[0].labels, LabelSet{2});
}

TEST(ParseDataset, UnknownLabelIsAnError) {
  try {
    parse(R"({"text":"x","labels":["serenity"]})");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("serenity"), std::string::npos);
  }
}

TEST(ParseDataset, MalformedLineNamesLineNumber) {
  try {
    parse("{\"text\":\"a\",\"labels\":[\"joy\"]}\n\n{oops\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseDataset, EmptyLabelsIsAnError) { EXPECT_THROW(parse(R"({"text":"x","labels":[]})"), ParseError); }

TEST(ParseDataset, PreservesOrderAndRoundTrips) {
  const std::string text =
      "{\"text\":\"first \\\"quoted\\\" \\u00e9\",\"labels\":[\"joy\",\"anger\"]}\n"
      "{\"text\":\"second\",\"labels\":[\"fear\"],\"id\":\"custom\"}\n";
  const auto a = parse(text);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.documents[0].labels, (LabelSet{0, 2}));
  EXPECT_EQ(a.documents[1].id, "custom");
  std::ostringstream out;
  write_dataset(out, a);
  const auto b = parse(out.str());
  EXPECT_EQ(a.documents, b.documents);
  std::ostringstream again;
  write_dataset(again, b);
  EXPECT_EQ(out.str(), again.str());
  EXPECT_EQ(out.str().rfind("{\"text\":", 0), 0u);
}

TEST(DecomposeHashtag, Examples) {
  EXPECT_EQ(decompose_hashtag("#SelfHate"), (std::vector<std::string>{"self", "hate"}));
  EXPECT_EQ(decompose_hashtag("#a"), (std::vector<std::string>{"a"}));
  EXPECT_EQ(decompose_hashtag("#no_hope2day"), (std::vector<std::string>{"no", "hope", "2", "day"}));
  EXPECT_EQ(decompose_hashtag("#MondayMotivation"), (std::vector<std::string>{"monday", "motivation"}));
  EXPECT_EQ(decompose_hashtag("#XMLHttpRequest"), (std::vector<std::string>{"xml", "http", "request"}));
}

TEST(Preprocess, UrlAndLabelHashtag) {
  EXPECT_EQ(pre("Check http://a.b #SelfHate now"), (std::vector<std::string>{"check", "url"}));
}

TEST(Preprocess, Mention) { EXPECT_EQ(pre("@JohnDoe YES"), (std::vector<std::string>{"@user", "yes"})); }

TEST(Preprocess, NonLabelHashtagIsDecomposed) {
  EXPECT_EQ(pre("#MondayMotivation"), (std::vector<std::string>{"monday", "motivation"}));
}

TEST(Preprocess, KeyPhraseAndPunctuation) {
  EXPECT_EQ(pre("Honestly, I am alone... again!!"), (std::vector<std::string>{"honestly"}));
  EXPECT_EQ(pre("Nobody wants me, ever."), (std::vector<std::string>{"ever"}));
  // Word boundaries: "no hopes" is not the key phrase "no hope".
  EXPECT_EQ(pre("no hopes today"), (std::vector<std::string>{"hopes", "today"}));
}

TEST(Preprocess, OutputIsLowercaseWithoutStopwords) {
  const auto stop = default_stopwords();
  for (const auto& t : pre("The QUICK Brown fox IS jumping over THE lazy Dog, #LazyDays @Someone www.x.org")) {
    EXPECT_FALSE(stop.contains(t)) << t;
    for (unsigned char c : t) EXPECT_FALSE(std::isupper(c)) << t;
  }
}

TEST(Preprocess, Idempotent) {
  const std::vector<std::string> samples{
      "Check http://a.b #SelfHate now",
      "@JohnDoe YES!!! #MondayMotivation",
      "I am alone, and I hate myself... #lonely",
      "(#HappyDays) \"quoted\" text -- with: punctuation;",
      "Mixed CASE words, emoji \xF0\x9F\x98\x80 and caf\xC3\xA9 #Caf\xC3\xA9Life",
      "..#tag.. @@double @ lonely # hash www.Example.com/Path?q=1",
      "no hope at the end of everything #no_hope2day",
  };
  for (const auto& s : samples) {
    const auto once = pre(s);
    std::string joined;
    for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(pre(joined), once) << s;
  }
}

TEST(Preprocess, NoLexiconTermSurvives) {
  const auto lexicon = LabelLexicon::defaults();
  const auto tags = lexicon.hashtags();
  for (const auto& t : pre("#Lonely #ANGRY #grateful feeling #ihatemyself #Rejection today")) {
    EXPECT_FALSE(tags.contains("#" + t)) << t;
  }
}

TEST(PrepareDataset, DropsIncompleteEmptyAndDuplicate) {
  auto ds = parse(
      "{\"text\":\"Great game tonight\",\"labels\":[\"joy\"]}\n"
      "{\"text\":\"great GAME tonight!\",\"labels\":[\"joy\"]}\n"
      "{\"text\":\"this was cut off...\",\"labels\":[\"anger\"]}\n"
      "{\"text\":\"also cut \xE2\x80\xA6\",\"labels\":[\"anger\"]}\n"
      "{\"text\":\"the and of\",\"labels\":[\"fear\"]}\n");
  PrepareStats stats;
  const auto out = prepare_dataset(ds, Preprocessor(LabelLexicon::defaults(), default_stopwords()), &stats);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.documents[0].tokens, (std::vector<std::string>{"great", "game", "tonight"}));
  EXPECT_EQ(stats.duplicate, 1u);
  EXPECT_EQ(stats.incomplete, 2u);
  EXPECT_EQ(stats.empty, 1u);
}

TEST(StopWords, FileMatchesBuiltIn) {
  std::ifstream in(std::string(EMOMINE_SOURCE_DIR) + "/data/stopwords_en.txt");
  ASSERT_TRUE(in);
  EXPECT_EQ(load_stopwords(in), default_stopwords());
  EXPECT_EQ(default_stopwords().size(), kEnglishStopWords.size());
  EXPECT_FALSE(default_stopwords().contains("yes"));
}

TEST(Lexicon, RoundTripsThroughJson) {
  std::ostringstream out;
  write_lexicon(out, LabelLexicon::defaults());
  std::istringstream in(out.str());
  EXPECT_EQ(parse_lexicon(in), LabelLexicon::defaults());
}

TEST(SplitFolds, PartitionSizes) {
  const auto ds = numbered(100);
  const auto plan = split_folds(ds, 5, 0.1, 3);
  for (int f = 0; f < 5; ++f) {
    const auto s = plan.split(ds, f);
    EXPECT_EQ(s.test.size(), 20u);
    EXPECT_EQ(s.validation.size(), 8u);
    EXPECT_EQ(s.train.size(), 72u);
  }
}

TEST(SplitFolds, Deterministic) {
  const auto ds = numbered(57);
  EXPECT_EQ(split_folds(ds, 5, 0.1, 9), split_folds(ds, 5, 0.1, 9));
  EXPECT_NE(split_folds(ds, 5, 0.1, 9).assignments, split_folds(ds, 5, 0.1, 10).assignments);
}

TEST(SplitFolds, TooFewDocuments) { EXPECT_THROW(split_folds(numbered(3), 5, 0.1, 1), Error); }

TEST(SplitFolds, EveryDocumentTestedOnceAndSplitsDisjoint) {
  const auto ds = numbered(53);
  const auto plan = split_folds(ds, 4, 0.15, 21);
  std::vector<int> tested(ds.size(), 0);
  for (int f = 0; f < 4; ++f) {
    const auto s = plan.split(ds, f);
    EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size(), ds.size());
    for (auto p : s.test) ++tested[p];
    std::set<std::size_t> val(s.validation.begin(), s.validation.end());
    for (auto p : s.test) EXPECT_FALSE(val.contains(p));
    for (auto p : s.train) EXPECT_FALSE(val.contains(p));
  }
  for (int t : tested) EXPECT_EQ(t, 1);
}

TEST(Synthetic, FrequenciesFollowWeights) {
  auto spec = SynthSpec::keyword_corpus(2, 5);
  spec.labelset_weights = {{{0}, 0.5}, {{1}, 0.5}};
  spec.documents = 200;
  const auto ds = generate_synthetic(spec, 4);
  std::size_t with_a = 0;
  for (const auto& d : ds.documents) with_a += contains_label(d.labels, 0);
  // 99% binomial interval for n = 200, p = 0.5: 100 +/- 2.576 * sqrt(50).
  EXPECT_NEAR(static_cast<double>(with_a), 100.0, 2.576 * std::sqrt(50.0));
}

TEST(Synthetic, DegenerateWeights) {
  auto spec = SynthSpec::keyword_corpus(2, 5);
  spec.labelset_weights = {{{0, 1}, 1.0}};
  spec.documents = 50;
  for (const auto& d : generate_synthetic(spec, 1).documents) EXPECT_EQ(d.labels, (LabelSet{0, 1}));
}

TEST(Synthetic, NoNoiseMeansOnlyLabelKeywords) {
  auto spec = SynthSpec::keyword_corpus(3, 8);
  spec.labelset_weights = {{{0}, 1.0}, {{1, 2}, 1.0}};
  spec.noise_rate = 0.0;
  spec.documents = 100;
  const auto ds = generate_synthetic(spec, 8);
  for (const auto& d : ds.documents) {
    std::set<std::string> allowed;
    for (LabelId l : d.labels)
      for (const auto& w : spec.lexicon[static_cast<std::size_t>(l)]) allowed.insert(w);
    for (const auto& t : d.tokens) EXPECT_TRUE(allowed.contains(t)) << t;
    for (LabelId l : d.labels) {
      const auto& lex = spec.lexicon[static_cast<std::size_t>(l)];
      EXPECT_TRUE(std::any_of(d.tokens.begin(), d.tokens.end(),
                              [&](const auto& t) { return std::find(lex.begin(), lex.end(), t) != lex.end(); }));
    }
  }
}

TEST(Synthetic, EmptyLexiconIsAnError) {
  auto spec = SynthSpec::keyword_corpus(2, 3);
  spec.lexicon[1].clear();
  spec.labelset_weights = {{{0}, 1.0}, {{1}, 1.0}};
  EXPECT_THROW(generate_synthetic(spec, 1), Error);
}

TEST(Synthetic, DeterministicAndUnique) {
  auto spec = SynthSpec::keyword_corpus(4, 4);
  spec.labelset_weights = {{{0}, 1.0}, {{1}, 1.0}, {{2, 3}, 1.0}};
  spec.documents = 300;
  const auto a = generate_synthetic(spec, 12);
  EXPECT_EQ(a.documents, generate_synthetic(spec, 12).documents);
  std::set<std::vector<std::string>> seen;
  for (const auto& d : a.documents) EXPECT_TRUE(seen.insert(d.tokens).second);
  // Tokens survive the default preprocessor unchanged.
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(pre(a.documents[i].raw_text), a.documents[i].tokens);
}
