#include "senmfk/textprep.hpp"

namespace senmfk {

// Standard English stopword list (the common ~180-word set used across NLP
// toolkits), fixed here so preprocessing is reproducible without an external
// data file. Callers may substitute their own list via load_stopwords.
const std::unordered_set<std::string>& default_stopwords() {
    static const std::unordered_set<std::string> kWords = {
        "a",       "about",   "above",    "after",   "again",    "against", "all",
        "am",      "an",      "and",      "any",     "are",      "aren",    "as",
        "at",      "be",      "because",  "been",    "before",   "being",   "below",
        "between", "both",    "but",      "by",      "can",      "cannot",  "could",
        "couldn",  "did",     "didn",     "do",      "does",     "doesn",   "doing",
        "don",     "down",    "during",   "each",    "few",      "for",     "from",
        "further", "had",     "hadn",     "has",     "hasn",     "have",    "haven",
        "having",  "he",      "her",      "here",    "hers",     "herself", "him",
        "himself", "his",     "how",      "i",       "if",       "in",      "into",
        "is",      "isn",     "it",       "its",     "itself",   "just",    "ll",
        "me",      "mightn",  "more",     "most",    "mustn",    "my",      "myself",
        "needn",   "no",      "nor",      "not",     "now",      "of",      "off",
        "on",      "once",    "only",     "or",      "other",    "our",     "ours",
        "ourselves", "out",   "over",     "own",     "re",       "s",       "same",
        "shan",    "she",     "should",   "shouldn", "so",       "some",    "such",
        "t",       "than",    "that",     "the",     "their",    "theirs",  "them",
        "themselves", "then", "there",    "these",   "they",     "this",    "those",
        "through", "to",      "too",      "under",   "until",    "up",      "ve",
        "very",    "was",     "wasn",     "we",      "were",     "weren",   "what",
        "when",    "where",   "which",    "while",   "who",      "whom",    "why",
        "will",    "with",    "won",      "would",   "wouldn",   "y",       "you",
        "your",    "yours",   "yourself", "yourselves",
    };
    return kWords;
}

}  // namespace senmfk
