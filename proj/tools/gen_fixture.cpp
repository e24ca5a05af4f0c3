#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "fixture_corpus.hpp"

// Regenerates the bundled synthetic corpus (planted-topic documents with
// known labels) used by the test suite and as a quick-start input.
int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic planted-topic corpus dump"};
    std::string out = "corpus.jsonl";
    int docs = 200;
    int topics = 3;
    std::uint64_t seed = 7;
    bool with_invalid = false;
    app.add_option("--out", out, "output JSONL path");
    app.add_option("--docs", docs, "document count");
    app.add_option("--topics", topics, "planted topic count (2..3)");
    app.add_option("--seed", seed, "generator seed");
    app.add_flag("--invalid", with_invalid, "interleave ill-formed/filtered records");
    CLI11_PARSE(app, argc, argv);

    try {
        senmfk::fixture::FixtureOptions opts;
        opts.n_docs = docs;
        opts.n_topics = topics;
        opts.seed = seed;
        const auto corpus = senmfk::fixture::make_planted_corpus(opts);
        senmfk::fixture::write_fixture_dump(corpus, out, with_invalid);
        std::cout << "wrote " << corpus.size() << " documents to " << out << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
