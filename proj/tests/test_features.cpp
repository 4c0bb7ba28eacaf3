#include <gtest/gtest.h>

#include <sstream>

#include "emomine/features.hpp"

using namespace emomine;

namespace {

Document doc(std::vector<std::string> tokens) { return {"", "", std::move(tokens), {0}}; }

std::vector<Document> abc_docs() {
  return {doc({"a", "b"}), doc({"a"}), doc({"a", "b"}), doc({"b", "c"})};
}

}  // namespace

TEST(Vocabulary, FrequencyOrderWithLexicographicTies) {
  const auto v = build_vocabulary(abc_docs(), 5000, 2);
  EXPECT_EQ(v.terms, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(v.frequencies, (std::vector<std::size_t>{3, 3}));
  EXPECT_EQ(*v.find("b"), 1u);
  EXPECT_FALSE(v.find("c"));
}

TEST(Vocabulary, MaxSizeTruncates) {
  EXPECT_EQ(build_vocabulary(abc_docs(), 1, 2).terms, (std::vector<std::string>{"a"}));
}

TEST(Vocabulary, MinDfCountsDocumentsNotOccurrences) {
  const std::vector<Document> docs{doc({"x", "x", "x"}), doc({"y"}), doc({"y"})};
  EXPECT_EQ(build_vocabulary(docs, 10, 2).terms, (std::vector<std::string>{"y"}));
}

TEST(Vocabulary, EmptyCorpusIsAnError) {
  EXPECT_THROW(build_vocabulary(std::vector<Document>{}, 10, 1), Error);
}

TEST(Bow, PresenceNotCount) {
  const auto v = make_vocabulary({"a", "b"}, {1, 1}, 10, 1);
  const auto x = vectorize_bow(doc({"a", "a", "z"}), v);
  EXPECT_EQ(x.to_dense(), (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(vectorize_bow(doc({}), v).to_dense(), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(vectorize_bow(doc({"b", "a"}), v).to_dense(), (std::vector<double>{1.0, 1.0}));
}

TEST(Embeddings, ParsesTextFormat) {
  std::istringstream in("hi 0.1 0.2\n");
  const auto t = load_embeddings(in, 2);
  ASSERT_NE(t.find("hi"), nullptr);
  EXPECT_EQ(*t.find("hi"), (std::vector<double>{0.1, 0.2}));
}

TEST(Embeddings, WrongArityNamesLine) {
  std::istringstream in("a 1 2\nb 1\n");
  try {
    load_embeddings(in, 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Embeddings, NonNumericComponent) {
  std::istringstream in("a 1 x\n");
  EXPECT_THROW(load_embeddings(in, 2), ParseError);
}

TEST(Embeddings, DuplicateKeepsFirst) {
  std::istringstream in("a 1 2\na 3 4\n");
  EXPECT_EQ(*load_embeddings(in, 2).find("a"), (std::vector<double>{1.0, 2.0}));
}

TEST(Embeddings, WriteThenLoadIsExact) {
  auto spec = SynthSpec::keyword_corpus(3, 2);
  spec.noise_vocabulary = 5;
  const auto t = synthetic_embeddings(spec, 4, 77);
  std::ostringstream out;
  write_embeddings(out, t);
  std::istringstream in(out.str());
  EXPECT_EQ(load_embeddings(in, 4).vectors, t.vectors);
}

TEST(EmbedAverage, MeanOfKnownTokens) {
  EmbeddingTable t;
  t.dim = 2;
  t.vectors = {{"a", {0.0, 1.0}}, {"b", {1.0, 0.0}}};
  EXPECT_EQ(embed_average(doc({"a", "b"}), t).values, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(embed_average(doc({"z"}), t).values, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(embed_average(doc({"a", "z", "a"}), t).values, (std::vector<double>{0.0, 1.0}));
}

TEST(MinMax, EndpointsAndMidpoint) {
  const std::vector<FeatureVector> train{FeatureVector::dense({0, 2}), FeatureVector::dense({1, 4})};
  const auto n = minmax_fit(train);
  EXPECT_EQ(minmax_apply(n, train[0]).values, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(minmax_apply(n, train[1]).values, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(minmax_apply(n, FeatureVector::dense({0.5, 3})).values, (std::vector<double>{0.5, 0.5}));
}

TEST(MinMax, ConstantDimensionAndClamping) {
  const std::vector<FeatureVector> train{FeatureVector::dense({5, 0}), FeatureVector::dense({5, 1})};
  const auto n = minmax_fit(train);
  EXPECT_EQ(minmax_apply(n, FeatureVector::dense({7, -3})).values, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(minmax_apply(n, FeatureVector::dense({5, 9})).values, (std::vector<double>{0.0, 1.0}));
}

TEST(MinMax, Errors) {
  EXPECT_THROW(minmax_fit(std::vector<FeatureVector>{}), Error);
  const auto n = minmax_fit(std::vector<FeatureVector>{FeatureVector::dense({1, 2})});
  EXPECT_THROW(minmax_apply(n, FeatureVector::dense({1})), Error);
}

TEST(MinMax, JsonRoundTrip) {
  const auto n = minmax_fit(std::vector<FeatureVector>{FeatureVector::dense({1, 2}), FeatureVector::dense({3, -1})});
  EXPECT_EQ(minmax_from_json(nlohmann::json::parse(to_json(n).dump())), n);
}

TEST(FeatureKind, Parse) {
  EXPECT_EQ(parse_feature_kind("BOW"), FeatureKind::kBow);
  EXPECT_EQ(parse_feature_kind("WE"), FeatureKind::kEmb);
  EXPECT_THROW(parse_feature_kind("tfidf"), Error);
}
