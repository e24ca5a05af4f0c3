#pragma once

#include <stdexcept>
#include <string>

namespace senmfk {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyCorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyVocabularyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StaleArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace senmfk
