#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "senmfk/document.hpp"

namespace senmfk {

// Per-file parse accounting: how many records were kept, and how many were
// skipped for which reason.
struct IngestStats {
    std::int64_t loaded = 0;
    std::int64_t skipped_bad_json = 0;
    std::int64_t skipped_missing_field = 0;
    std::int64_t skipped_empty_text = 0;
    std::int64_t skipped_bad_year = 0;
    std::int64_t skipped_duplicate_id = 0;

    std::int64_t skipped_total() const {
        return skipped_bad_json + skipped_missing_field + skipped_empty_text + skipped_bad_year +
               skipped_duplicate_id;
    }
};

// Reads a line-delimited JSON dump (fields: id, abstract, categories, doi,
// created or year) and returns one Document per well-formed record.
// Ill-formed records are counted in `stats`, not fatal. Duplicate ids keep the
// first occurrence. Throws IoError if the file cannot be read and
// EmptyCorpusError if no record parses.
std::vector<Document> load_corpus(const std::string& path, IngestStats* stats = nullptr);

// Keeps exactly the documents passing the filter, preserving order.
std::vector<Document> filter_corpus(const std::vector<Document>& docs, const CorpusFilter& f);

// Writes documents back out in the same line-delimited format load_corpus
// reads, one record per line (round-trip safe).
void save_corpus(const std::vector<Document>& docs, const std::string& path);

}  // namespace senmfk
