#include "senmfk/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

namespace senmfk {

namespace {

using nlohmann::json;

// "cond-mat.supr-con" vs "condmat.suprcon": lowercase and strip hyphens so
// both spellings compare equal.
std::string normalize_category(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '-') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Accepts either an integer `year` field or a `created` date string whose
// leading four characters are the year (e.g. "2010-04-07").
bool parse_year(const json& rec, int* year) {
    if (rec.contains("year") && rec["year"].is_number_integer()) {
        *year = rec["year"].get<int>();
        return true;
    }
    if (rec.contains("created") && rec["created"].is_string()) {
        const std::string created = rec["created"].get<std::string>();
        if (created.size() >= 4 && std::all_of(created.begin(), created.begin() + 4, [](char c) {
                return std::isdigit(static_cast<unsigned char>(c));
            })) {
            *year = std::stoi(created.substr(0, 4));
            return true;
        }
    }
    return false;
}

bool parse_record(const json& rec, Document* doc) {
    if (!rec.is_object()) return false;
    if (!rec.contains("id") || !rec["id"].is_string()) return false;
    if (!rec.contains("abstract") || !rec["abstract"].is_string()) return false;
    doc->id = rec["id"].get<std::string>();
    doc->text = rec["abstract"].get<std::string>();
    doc->categories.clear();
    if (rec.contains("categories")) {
        const json& cats = rec["categories"];
        if (cats.is_array()) {
            for (const auto& c : cats) {
                if (c.is_string()) doc->categories.insert(c.get<std::string>());
            }
        } else if (cats.is_string()) {
            // Space-separated category string, the other common dump form.
            const std::string s = cats.get<std::string>();
            size_t pos = 0;
            while (pos < s.size()) {
                size_t sp = s.find(' ', pos);
                if (sp == std::string::npos) sp = s.size();
                if (sp > pos) doc->categories.insert(s.substr(pos, sp - pos));
                pos = sp + 1;
            }
        }
    }
    doc->doi.reset();
    if (rec.contains("doi") && rec["doi"].is_string()) {
        const std::string d = rec["doi"].get<std::string>();
        if (!d.empty()) doc->doi = d;
    }
    return true;
}

}  // namespace

std::vector<Document> load_corpus(const std::string& path, IngestStats* stats) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus file: " + path);
    }
    IngestStats local;
    IngestStats& st = stats != nullptr ? *stats : local;
    st = IngestStats{};

    std::vector<Document> docs;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded()) {
            ++st.skipped_bad_json;
            continue;
        }
        Document doc;
        if (!parse_record(rec, &doc)) {
            ++st.skipped_missing_field;
            continue;
        }
        if (doc.id.empty() || trim(doc.text).empty()) {
            ++st.skipped_empty_text;
            continue;
        }
        if (!parse_year(rec, &doc.year)) {
            ++st.skipped_bad_year;
            continue;
        }
        if (!seen_ids.insert(doc.id).second) {
            ++st.skipped_duplicate_id;
            continue;
        }
        docs.push_back(std::move(doc));
    }
    st.loaded = static_cast<std::int64_t>(docs.size());
    if (docs.empty()) {
        throw EmptyCorpusError("no well-formed records in: " + path);
    }
    return docs;
}

std::vector<Document> filter_corpus(const std::vector<Document>& docs, const CorpusFilter& f) {
    f.validate();
    const std::string want = normalize_category(f.required_category);
    std::vector<Document> out;
    for (const auto& d : docs) {
        const bool cat_ok = std::any_of(d.categories.begin(), d.categories.end(),
                                        [&](const std::string& c) { return normalize_category(c) == want; });
        if (!cat_ok) continue;
        if (f.require_doi && !d.doi.has_value()) continue;
        if (d.year < f.year_min || d.year > f.year_max) continue;
        out.push_back(d);
    }
    return out;
}

void save_corpus(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open file for writing: " + path);
    }
    for (const auto& d : docs) {
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
        out << rec.dump() << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

}  // namespace senmfk
