#include "senmfk/textprep.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "senmfk/errors.hpp"

namespace senmfk {

namespace {

using nlohmann::json;

bool is_token_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_';
}

bool is_pure_numeric(const std::string& t) {
    return std::all_of(t.begin(), t.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text,
                                  const std::unordered_set<std::string>& stopwords) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&]() {
        if (cur.empty()) return;
        if (cur.size() >= 2 && !is_pure_numeric(cur) && stopwords.count(cur) == 0) {
            out.push_back(cur);
        }
        cur.clear();
    };
    for (unsigned char c : text) {
        if (is_token_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open stopword file: " + path);
    }
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' ')) {
            line.pop_back();
        }
        if (!line.empty()) words.insert(line);
    }
    return words;
}

namespace {

// One scoring pass over the token streams: counts unigrams and adjacent
// pairs, scores every pair, and adds accepted ones to the model.
void score_pass(const std::vector<TokenizedDoc>& docs, std::int64_t min_count, double threshold,
                double delta, PhraseModel* pm) {
    std::unordered_map<std::string, std::int64_t> unigram;
    std::map<std::pair<std::string, std::string>, std::int64_t> pair_count;
    std::int64_t total = 0;
    for (const auto& d : docs) {
        for (size_t i = 0; i < d.tokens.size(); ++i) {
            ++unigram[d.tokens[i]];
            ++total;
            if (i + 1 < d.tokens.size()) {
                ++pair_count[{d.tokens[i], d.tokens[i + 1]}];
            }
        }
    }
    const double t = static_cast<double>(total);
    for (const auto& [pair, cnt] : pair_count) {
        const double score = (static_cast<double>(cnt) - delta) * t /
                             (static_cast<double>(unigram[pair.first]) *
                              static_cast<double>(unigram[pair.second]));
        pm->candidates.push_back({pair.first, pair.second, cnt, score});
        if (cnt >= min_count && score >= threshold) {
            pm->accepted[pair] = pair.first + "_" + pair.second;
        }
    }
}

std::vector<std::string> merge_once(const std::vector<std::string>& tokens,
                                    const PhraseModel& pm) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    size_t i = 0;
    while (i < tokens.size()) {
        if (i + 1 < tokens.size()) {
            auto it = pm.accepted.find({tokens[i], tokens[i + 1]});
            if (it != pm.accepted.end()) {
                out.push_back(it->second);
                i += 2;
                continue;
            }
        }
        out.push_back(tokens[i]);
        ++i;
    }
    return out;
}

}  // namespace

PhraseModel learn_phrases(const std::vector<TokenizedDoc>& docs, std::int64_t min_count,
                          double threshold, double delta, int passes) {
    if (passes != 1 && passes != 2) {
        throw ConfigError("phrase passes must be 1 or 2");
    }
    PhraseModel pm;
    pm.min_count = min_count;
    pm.threshold = threshold;
    pm.delta = delta;
    pm.passes = passes;
    if (docs.empty()) return pm;

    score_pass(docs, min_count, threshold, delta, &pm);
    if (passes == 2) {
        std::vector<TokenizedDoc> merged;
        merged.reserve(docs.size());
        for (const auto& d : docs) {
            merged.push_back({d.doc_id, merge_once(d.tokens, pm)});
        }
        score_pass(merged, min_count, threshold, delta, &pm);
    }
    return pm;
}

TokenizedDoc apply_phrases(const TokenizedDoc& doc, const PhraseModel& pm) {
    TokenizedDoc out;
    out.doc_id = doc.doc_id;
    out.tokens = doc.tokens;
    for (int p = 0; p < pm.passes; ++p) {
        out.tokens = merge_once(out.tokens, pm);
    }
    return out;
}

std::vector<TokenizedDoc> apply_phrases(const std::vector<TokenizedDoc>& docs,
                                        const PhraseModel& pm) {
    std::vector<TokenizedDoc> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(apply_phrases(d, pm));
    return out;
}

Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, std::int64_t min_df,
                            double max_df_fraction) {
    if (max_df_fraction <= 0.0 || max_df_fraction > 1.0) {
        throw ConfigError("max_df_fraction must lie in (0, 1]");
    }
    const double n = static_cast<double>(docs.size());
    std::unordered_map<std::string, std::int64_t> df;
    std::unordered_map<std::string, std::int64_t> cf;
    for (const auto& d : docs) {
        std::unordered_set<std::string> seen;
        for (const auto& t : d.tokens) {
            ++cf[t];
            if (seen.insert(t).second) ++df[t];
        }
    }
    struct Entry {
        std::string token;
        std::int64_t df;
        std::int64_t cf;
    };
    std::vector<Entry> kept;
    for (const auto& [token, count] : df) {
        if (count < min_df) continue;
        if (static_cast<double>(count) > max_df_fraction * n) continue;
        kept.push_back({token, count, cf[token]});
    }
    if (kept.empty()) {
        throw EmptyVocabularyError("vocabulary pruning removed every token");
    }
    std::sort(kept.begin(), kept.end(), [](const Entry& a, const Entry& b) {
        if (a.cf != b.cf) return a.cf > b.cf;
        return a.token < b.token;
    });
    Vocabulary vocab;
    vocab.index_to_token.reserve(kept.size());
    vocab.doc_freq.reserve(kept.size());
    vocab.corpus_freq.reserve(kept.size());
    for (size_t i = 0; i < kept.size(); ++i) {
        vocab.token_to_index[kept[i].token] = static_cast<int>(i);
        vocab.index_to_token.push_back(kept[i].token);
        vocab.doc_freq.push_back(kept[i].df);
        vocab.corpus_freq.push_back(kept[i].cf);
    }
    return vocab;
}

void save_tokens(const std::vector<TokenizedDoc>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    for (const auto& d : docs) {
        json rec;
        rec["doc_id"] = d.doc_id;
        rec["tokens"] = d.tokens;
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<TokenizedDoc> load_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open token file: " + path);
    std::vector<TokenizedDoc> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        TokenizedDoc d;
        d.doc_id = rec.at("doc_id").get<std::string>();
        d.tokens = rec.at("tokens").get<std::vector<std::string>>();
        docs.push_back(std::move(d));
    }
    return docs;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "index\ttoken\tdoc_freq\tcorpus_freq\n";
    for (int i = 0; i < vocab.size(); ++i) {
        out << i << '\t' << vocab.index_to_token[i] << '\t' << vocab.doc_freq[i] << '\t'
            << vocab.corpus_freq[i] << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary file: " + path);
    Vocabulary vocab;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        int index = 0;
        std::string token;
        std::int64_t df = 0;
        std::int64_t cf = 0;
        ss >> index >> token >> df >> cf;
        if (!ss.fail()) {
            if (index != vocab.size()) {
                throw IoError("vocabulary file indices out of order: " + path);
            }
            vocab.token_to_index[token] = index;
            vocab.index_to_token.push_back(token);
            vocab.doc_freq.push_back(df);
            vocab.corpus_freq.push_back(cf);
        }
    }
    return vocab;
}

void save_phrases(const PhraseModel& pm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "#min_count\t" << pm.min_count << "\tthreshold\t" << pm.threshold << "\tdelta\t"
        << pm.delta << "\tpasses\t" << pm.passes << '\n';
    out << "left\tright\tpair_count\tscore\taccepted\n";
    char buf[64];
    for (const auto& c : pm.candidates) {
        const bool acc = pm.is_accepted(c.left, c.right);
        std::snprintf(buf, sizeof(buf), "%.17g", c.score);
        out << c.left << '\t' << c.right << '\t' << c.pair_count << '\t' << buf << '\t'
            << (acc ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

PhraseModel load_phrases(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open phrase file: " + path);
    PhraseModel pm;
    std::string line;
    if (std::getline(in, line) && !line.empty() && line[0] == '#') {
        std::istringstream ss(line.substr(1));
        std::string key;
        while (ss >> key) {
            if (key == "min_count") ss >> pm.min_count;
            else if (key == "threshold") ss >> pm.threshold;
            else if (key == "delta") ss >> pm.delta;
            else if (key == "passes") ss >> pm.passes;
        }
        std::getline(in, line);  // column header
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        PhraseModel::Candidate c;
        int accepted = 0;
        ss >> c.left >> c.right >> c.pair_count >> c.score >> accepted;
        if (ss.fail()) continue;
        pm.candidates.push_back(c);
        if (accepted != 0) {
            pm.accepted[{c.left, c.right}] = c.left + "_" + c.right;
        }
    }
    return pm;
}

}  // namespace senmfk
