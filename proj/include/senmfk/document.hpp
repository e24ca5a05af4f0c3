#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "senmfk/errors.hpp"

namespace senmfk {

// One abstract with metadata.
struct Document {
    std::string id;
    std::string text;
    std::set<std::string> categories;
    std::optional<std::string> doi;
    int year = 0;
};

// Predicate bundle deciding which documents enter the corpus.
struct CorpusFilter {
    std::string required_category = "cond-mat.supr-con";
    bool require_doi = true;
    int year_min = 2007;
    int year_max = 2018;

    void validate() const {
        if (year_min > year_max) {
            throw ConfigError("year_min must not exceed year_max");
        }
    }
};

}  // namespace senmfk
