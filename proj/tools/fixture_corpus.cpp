#include "fixture_corpus.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

#include "senmfk/errors.hpp"
#include "senmfk/rng.hpp"

namespace senmfk::fixture {

const std::vector<std::vector<std::string>>& theme_pools() {
    static const std::vector<std::vector<std::string>> kPools = {
        {"vortex", "pinning", "flux", "magnetization", "penetration", "creep", "abrikosov",
         "anisotropy", "demagnetization", "hysteresis", "remanence", "vortices", "lattice",
         "melting"},
        {"josephson", "junction", "tunneling", "squid", "qubit", "microwave", "resonator",
         "coherence", "shapiro", "plasma", "cavity", "interferometer", "clocking", "modulation"},
        {"pairing", "cuprate", "doping", "pseudogap", "antiferromagnet", "superexchange",
         "nesting", "photoemission", "kondo", "correlation", "spectroscopy", "stripes",
         "condensate", "quasiparticle"},
    };
    return kPools;
}

const std::vector<std::string>& shared_pool() {
    static const std::vector<std::string> kShared = {"temperature", "sample",     "measurement",
                                                     "results",     "experiment", "material"};
    return kShared;
}

std::vector<Document> make_planted_corpus(const FixtureOptions& opts) {
    if (opts.n_topics < 2 || opts.n_topics > static_cast<int>(theme_pools().size())) {
        throw ConfigError("n_topics out of range for the defined theme pools");
    }
    if (opts.len_min < 1 || opts.len_max < opts.len_min) {
        throw ConfigError("bad document length range");
    }
    Rng rng(opts.seed);
    std::vector<Document> docs;
    docs.reserve(opts.n_docs);
    char buf[64];
    for (int i = 0; i < opts.n_docs; ++i) {
        const int topic = i % opts.n_topics;
        const auto& pool = theme_pools()[topic];
        const int len = opts.len_min +
                        static_cast<int>(rng.below(
                            static_cast<std::uint64_t>(opts.len_max - opts.len_min + 1)));
        std::string text;
        for (int t = 0; t < len; ++t) {
            const std::string& word =
                rng.uniform01() < opts.pool_prob
                    ? pool[rng.below(pool.size())]
                    : shared_pool()[rng.below(shared_pool().size())];
            if (!text.empty()) text.push_back(' ');
            text += word;
        }
        text.push_back('.');
        Document d;
        std::snprintf(buf, sizeof(buf), "syn-%04d", i);
        d.id = buf;
        d.text = std::move(text);
        d.categories = {"cond-mat.supr-con"};
        std::snprintf(buf, sizeof(buf), "10.1000/syn.%04d", i);
        d.doi = std::string(buf);
        d.year = 2007 + i % 12;
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<int> planted_labels(const FixtureOptions& opts) {
    std::vector<int> labels(opts.n_docs);
    for (int i = 0; i < opts.n_docs; ++i) labels[i] = i % opts.n_topics;
    return labels;
}

void write_fixture_dump(const std::vector<Document>& docs, const std::string& path,
                        bool with_invalid) {
    using nlohmann::json;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    auto record = [](const Document& d) {
        json rec;
        rec["id"] = d.id;
        rec["abstract"] = d.text;
        rec["categories"] = json::array();
        for (const auto& c : d.categories) rec["categories"].push_back(c);
        if (d.doi.has_value()) {
            rec["doi"] = *d.doi;
        } else {
            rec["doi"] = nullptr;
        }
        rec["year"] = d.year;
        return rec;
    };
    for (size_t i = 0; i < docs.size(); ++i) {
        if (with_invalid && i > 0 && i % 50 == 0) {
            switch ((i / 50) % 5) {
                case 1:
                    out << "{this line is not valid json\n";
                    break;
                case 2: {
                    json rec = record(docs[i]);
                    rec.erase("abstract");
                    rec["id"] = "bad-" + std::to_string(i);
                    out << rec.dump() << '\n';
                    break;
                }
                case 3: {
                    json rec = record(docs[i]);
                    rec["id"] = "offtopic-" + std::to_string(i);
                    rec["categories"] = json::array({"hep-th"});
                    out << rec.dump() << '\n';
                    break;
                }
                case 4: {
                    json rec = record(docs[i]);
                    rec["id"] = "nodoi-" + std::to_string(i);
                    rec["doi"] = nullptr;
                    out << rec.dump() << '\n';
                    break;
                }
                case 0: {
                    json rec = record(docs[i]);
                    rec["id"] = "tooearly-" + std::to_string(i);
                    rec["year"] = 1999;
                    out << rec.dump() << '\n';
                    break;
                }
            }
        }
        out << record(docs[i]).dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace senmfk::fixture
