#pragma once

#include <array>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "emomine/error.hpp"

namespace emomine {

using StopWords = std::unordered_set<std::string>;

/// Pinned English stop-word list, version 1 (the NLTK 3.x English list).
/// data/stopwords_en.txt carries the same words; a unit test keeps them equal.
inline constexpr std::string_view kStopWordListVersion = "en-v1";

inline constexpr std::array<std::string_view, 179> kEnglishStopWords = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
    "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his",
    "himself", "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself",
    "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
    "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing",
    "a", "an", "the", "and", "but", "if", "or", "because", "as", "until",
    "while", "of", "at", "by", "for", "with", "about", "against", "between", "into",
    "through", "during", "before", "after", "above", "below", "to", "from", "up", "down",
    "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each",
    "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only",
    "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
    "just", "don", "don't", "should", "should've", "now", "d", "ll", "m", "o",
    "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn", "didn't",
    "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't",
    "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
    "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
};

inline StopWords default_stopwords() {
  StopWords words;
  for (auto w : kEnglishStopWords) words.emplace(w);
  return words;
}

/// One word per line; blank lines and surrounding whitespace are ignored.
inline StopWords load_stopwords(std::istream& in) {
  StopWords words;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r\n");
    words.insert(line.substr(b, e - b + 1));
  }
  return words;
}

}  // namespace emomine
