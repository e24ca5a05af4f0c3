#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "senmfk/document.hpp"

namespace senmfk::fixture {

// Synthetic corpus with planted topics: each document draws most tokens from
// one of `n_topics` disjoint themed word pools and the rest from a small
// shared pool, so the true topic count and per-document labels are known by
// construction.
struct FixtureOptions {
    int n_docs = 200;
    int n_topics = 3;          // at most 3 themed pools are defined
    double pool_prob = 0.88;   // probability a token comes from the doc's own pool
    int len_min = 35;
    int len_max = 60;
    std::uint64_t seed = 7;
};

// The themed pools (index = topic) and the shared filler pool.
const std::vector<std::vector<std::string>>& theme_pools();
const std::vector<std::string>& shared_pool();

// Documents carry metadata passing the default corpus filter (category
// cond-mat.supr-con, DOI set, years 2007-2018). Document i's planted topic is
// i % n_topics.
std::vector<Document> make_planted_corpus(const FixtureOptions& opts);

std::vector<int> planted_labels(const FixtureOptions& opts);

// Writes the corpus as a line-delimited dump. When with_invalid is set, a
// handful of ill-formed or filter-rejected records are interleaved (bad JSON,
// missing abstract, wrong category, missing DOI, out-of-range year) to
// exercise ingest accounting; the planted documents are unaffected.
void write_fixture_dump(const std::vector<Document>& docs, const std::string& path,
                        bool with_invalid);

}  // namespace senmfk::fixture
