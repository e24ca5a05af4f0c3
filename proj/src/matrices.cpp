#include "senmfk/matrices.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "senmfk/errors.hpp"

namespace senmfk {

TfidfMatrix build_tfidf(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab) {
    const int f = vocab.size();
    if (f == 0) {
        throw EmptyVocabularyError("cannot build TF-IDF over an empty vocabulary");
    }
    const int n = static_cast<int>(docs.size());
    const double n_docs = static_cast<double>(n);

    std::vector<double> idf(f);
    for (int t = 0; t < f; ++t) {
        idf[t] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(vocab.doc_freq[t]))) + 1.0;
    }

    std::vector<Eigen::Triplet<double>> trips;
    for (int d = 0; d < n; ++d) {
        std::map<int, double> tf;  // ordered so column entries are in row order
        for (const auto& tok : docs[d].tokens) {
            const int t = vocab.index_of(tok);
            if (t >= 0) tf[t] += 1.0;
        }
        double norm2 = 0.0;
        for (const auto& [t, count] : tf) {
            const double v = count * idf[t];
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        for (const auto& [t, count] : tf) {
            trips.emplace_back(t, d, count * idf[t] / norm);
        }
    }

    TfidfMatrix out;
    out.X.resize(f, n);
    out.X.setFromTriplets(trips.begin(), trips.end());
    out.X.makeCompressed();
    out.n_docs = n;
    out.doc_ids.reserve(docs.size());
    for (const auto& d : docs) out.doc_ids.push_back(d.doc_id);
    return out;
}

SparseMatrix build_cooccurrence(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab,
                                int window, bool include_diagonal) {
    if (window < 1) {
        throw ConfigError("window must be >= 1");
    }
    const int f = vocab.size();
    // Counts accumulate in an ordered map keyed (row, col); integer-valued
    // doubles stay exact, so downstream PMI is reproducible bit-for-bit.
    std::map<std::pair<int, int>, double> counts;
    std::vector<int> ids;
    for (const auto& doc : docs) {
        ids.clear();
        ids.reserve(doc.tokens.size());
        for (const auto& tok : doc.tokens) {
            ids.push_back(vocab.index_of(tok));
        }
        const int len = static_cast<int>(ids.size());
        for (int p = 0; p < len; ++p) {
            if (ids[p] < 0) continue;
            const int hi = std::min(len - 1, p + window);
            for (int q = p + 1; q <= hi; ++q) {
                if (ids[q] < 0) continue;
                const int i = ids[p];
                const int j = ids[q];
                if (i == j && !include_diagonal) continue;
                // Both ordered pairs (p,q) and (q,p).
                counts[{i, j}] += 1.0;
                counts[{j, i}] += 1.0;
            }
        }
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(counts.size());
    for (const auto& [key, v] : counts) {
        trips.emplace_back(key.first, key.second, v);
    }
    SparseMatrix c(f, f);
    c.setFromTriplets(trips.begin(), trips.end());
    c.makeCompressed();
    return c;
}

SppmiMatrix build_sppmi(const SparseMatrix& C, double shift, int window) {
    if (shift < 1.0) {
        throw ConfigError("SPPMI shift must be >= 1");
    }
    const int f = static_cast<int>(C.rows());
    if (C.cols() != f) {
        throw ShapeError("co-occurrence matrix must be square");
    }
    std::vector<double> row_sum(f, 0.0);
    double total = 0.0;
    for (int col = 0; col < C.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(C, col); it; ++it) {
            row_sum[it.row()] += it.value();
            total += it.value();
        }
    }
    if (total == 0.0) {
        throw EmptyCorpusError("co-occurrence matrix has no counts");
    }
    const double log_shift = std::log(shift);
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < C.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(C, col); it; ++it) {
            const double pmi =
                std::log(it.value() * total / (row_sum[it.row()] * row_sum[it.col()]));
            const double v = pmi - log_shift;
            if (v > 0.0) {
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), v);
            }
        }
    }
    SppmiMatrix out;
    out.M.resize(f, f);
    out.M.setFromTriplets(trips.begin(), trips.end());
    out.M.makeCompressed();
    out.window = window;
    out.shift = shift;
    return out;
}

AugmentedMatrix concatenate(const TfidfMatrix& X, const SppmiMatrix& M, double lambda) {
    if (lambda < 0.0) {
        throw ConfigError("lambda must be >= 0");
    }
    if (X.X.rows() != M.M.rows()) {
        throw ShapeError("TF-IDF and SPPMI row dimensions disagree");
    }
    const int f = static_cast<int>(X.X.rows());
    const int n = static_cast<int>(X.X.cols());
    const double scale = std::sqrt(lambda);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(X.X.nonZeros()) +
                  (scale > 0.0 ? static_cast<size_t>(M.M.nonZeros()) : 0));
    for (int col = 0; col < X.X.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(X.X, col); it; ++it) {
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    if (scale > 0.0) {
        for (int col = 0; col < M.M.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(M.M, col); it; ++it) {
                trips.emplace_back(static_cast<int>(it.row()), n + static_cast<int>(it.col()),
                                   scale * it.value());
            }
        }
    }
    AugmentedMatrix out;
    out.A.resize(f, n + f);
    out.A.setFromTriplets(trips.begin(), trips.end());
    out.A.makeCompressed();
    out.lambda = lambda;
    out.n_docs = n;
    return out;
}

void save_sparse(const SparseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    // Row-major entry order keeps the file canonical regardless of the
    // in-memory storage order.
    std::vector<std::tuple<int, int, double>> entries;
    entries.reserve(static_cast<size_t>(m.nonZeros()));
    for (int col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
            entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                 it.value());
        }
    }
    std::sort(entries.begin(), entries.end());
    out << m.rows() << ' ' << m.cols() << ' ' << entries.size() << '\n';
    char buf[64];
    for (const auto& [r, c, v] : entries) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << r << ' ' << c << ' ' << buf << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

SparseMatrix load_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sparse matrix file: " + path);
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::int64_t nnz = 0;
    if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
        throw IoError("malformed sparse matrix header: " + path);
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(nnz));
    for (std::int64_t i = 0; i < nnz; ++i) {
        std::int64_t r = 0;
        std::int64_t c = 0;
        double v = 0.0;
        if (!(in >> r >> c >> v)) {
            throw IoError("truncated sparse matrix file: " + path);
        }
        if (r < 0 || r >= rows || c < 0 || c >= cols) {
            throw IoError("sparse entry out of bounds: " + path);
        }
        trips.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    }
    SparseMatrix m(static_cast<int>(rows), static_cast<int>(cols));
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

}  // namespace senmfk
