#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace senmfk {

struct TokenizedDoc {
    std::string doc_id;
    std::vector<std::string> tokens;
};

// Bijection token <-> [0, F) plus per-token document and corpus frequencies.
struct Vocabulary {
    std::unordered_map<std::string, int> token_to_index;
    std::vector<std::string> index_to_token;
    std::vector<std::int64_t> doc_freq;     // per index
    std::vector<std::int64_t> corpus_freq;  // per index

    int size() const { return static_cast<int>(index_to_token.size()); }

    // -1 if absent.
    int index_of(const std::string& token) const {
        auto it = token_to_index.find(token);
        return it == token_to_index.end() ? -1 : it->second;
    }
};

// Scored adjacent-pair table. A pair (a, b) is accepted into the merge set
// when score(a, b) = (count(ab) - delta) * T / (count(a) * count(b)) meets the
// threshold and count(ab) meets min_count; T is the total token count.
struct PhraseModel {
    struct Candidate {
        std::string left;
        std::string right;
        std::int64_t pair_count = 0;
        double score = 0.0;
    };
    std::vector<Candidate> candidates;               // all scored pairs, for reporting
    std::map<std::pair<std::string, std::string>, std::string> accepted;  // (a,b) -> "a_b"
    std::int64_t min_count = 20;
    double threshold = 10.0;
    double delta = 5.0;
    int passes = 1;  // merge sweeps needed at application time

    bool is_accepted(const std::string& a, const std::string& b) const {
        return accepted.count({a, b}) != 0;
    }
};

// The built-in English stopword list shipped with the library.
const std::unordered_set<std::string>& default_stopwords();

// Loads one stopword per line; blank lines ignored. Throws IoError.
std::unordered_set<std::string> load_stopwords(const std::string& path);

// Lowercases, splits on punctuation/whitespace, drops pure-numeric and
// length-1 tokens, then drops stopwords. Original order preserved.
// Underscores are kept so phrase-merged tokens survive re-tokenization.
std::vector<std::string> tokenize(const std::string& text,
                                  const std::unordered_set<std::string>& stopwords);

// Scores adjacent pairs over the corpus. passes=2 applies the learned bigrams
// and re-learns on the merged streams, so trigrams emerge as a bigram whose
// half is itself a bigram. Deterministic.
PhraseModel learn_phrases(const std::vector<TokenizedDoc>& docs, std::int64_t min_count,
                          double threshold, double delta, int passes);

// Greedy left-to-right merge of adjacent accepted pairs; a token consumed by
// a merge is unavailable to the next pair.
TokenizedDoc apply_phrases(const TokenizedDoc& doc, const PhraseModel& pm);
std::vector<TokenizedDoc> apply_phrases(const std::vector<TokenizedDoc>& docs,
                                        const PhraseModel& pm);

// Keeps tokens with min_df <= doc_freq <= max_df_fraction * N; indices in
// descending corpus frequency, ties lexicographic. Throws
// EmptyVocabularyError if nothing survives.
Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, std::int64_t min_df,
                            double max_df_fraction);

// Tokenized-corpus persistence (line-delimited JSON: doc_id, tokens).
void save_tokens(const std::vector<TokenizedDoc>& docs, const std::string& path);
std::vector<TokenizedDoc> load_tokens(const std::string& path);

// Vocabulary persistence (TSV: index, token, doc_freq, corpus_freq).
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

// Phrase-table persistence (TSV: left, right, pair_count, score, accepted).
void save_phrases(const PhraseModel& pm, const std::string& path);
PhraseModel load_phrases(const std::string& path);

}  // namespace senmfk
