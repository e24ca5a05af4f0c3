#pragma once

// Independent reference implementations used to cross-check the production
// code. These are deliberately written the slow, obvious way (direct
// enumeration from the defining formulas) and share no code with the library
// paths they validate.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "senmfk/matrices.hpp"
#include "senmfk/rng.hpp"
#include "senmfk/textprep.hpp"

namespace oracle {

// SPPMI by direct enumeration of every ordered position pair in every
// document, straight from the definition.
inline Eigen::MatrixXd sppmi_brute(const std::vector<std::vector<int>>& docs, int f, int window,
                                   double shift, bool include_diagonal) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(f, f);
    for (const auto& ids : docs) {
        const int len = static_cast<int>(ids.size());
        for (int p = 0; p < len; ++p) {
            for (int q = 0; q < len; ++q) {
                if (p == q) continue;
                if (std::abs(p - q) > window) continue;
                if (ids[p] < 0 || ids[q] < 0) continue;
                if (ids[p] == ids[q] && !include_diagonal) continue;
                c(ids[p], ids[q]) += 1.0;
            }
        }
    }
    const double total = c.sum();
    Eigen::VectorXd row = c.rowwise().sum();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(f, f);
    for (int i = 0; i < f; ++i) {
        for (int j = 0; j < f; ++j) {
            if (c(i, j) <= 0.0) continue;
            const double pmi = std::log(c(i, j) * total / (row(i) * row(j)));
            m(i, j) = std::max(pmi - std::log(shift), 0.0);
        }
    }
    return m;
}

// Silhouette by direct pairwise cosine distances.
inline std::pair<std::vector<double>, double> silhouette_brute(const Eigen::MatrixXd& points,
                                                               const std::vector<int>& labels,
                                                               int n_clusters) {
    const int n = static_cast<int>(points.cols());
    auto cos_dist = [&](int a, int b) {
        const double na = points.col(a).norm();
        const double nb = points.col(b).norm();
        if (na == 0.0 || nb == 0.0) return 1.0;
        return 1.0 - points.col(a).dot(points.col(b)) / (na * nb);
    };
    std::vector<int> sizes(n_clusters, 0);
    for (int l : labels) ++sizes[l];
    std::vector<double> s(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (sizes[labels[i]] == 1) continue;
        double a = 0.0;
        std::vector<double> to_cluster(n_clusters, 0.0);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            to_cluster[labels[j]] += cos_dist(i, j);
        }
        a = to_cluster[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < n_clusters; ++c) {
            if (c == labels[i]) continue;
            b = std::min(b, to_cluster[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(n);
    return {s, mean};
}

// Euclidean silhouette (for scoring 2-D embeddings against true labels).
inline double euclidean_silhouette_mean(const Eigen::MatrixXd& rows_are_points,
                                        const std::vector<int>& labels, int n_clusters) {
    const int n = static_cast<int>(rows_are_points.rows());
    std::vector<int> sizes(n_clusters, 0);
    for (int l : labels) ++sizes[l];
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        if (sizes[labels[i]] == 1) continue;
        std::vector<double> to_cluster(n_clusters, 0.0);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            to_cluster[labels[j]] += (rows_are_points.row(i) - rows_are_points.row(j)).norm();
        }
        const double a = to_cluster[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < n_clusters; ++c) {
            if (c == labels[i]) continue;
            b = std::min(b, to_cluster[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        mean += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return mean / static_cast<double>(n);
}

// Fraction of points whose cluster's majority true label matches their own.
inline double purity(const std::vector<int>& labels, const std::vector<int>& truth,
                     int n_clusters) {
    double correct = 0.0;
    for (int c = 0; c < n_clusters; ++c) {
        std::map<int, int> votes;
        for (size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) ++votes[truth[i]];
        }
        int best = 0;
        for (const auto& [t, v] : votes) best = std::max(best, v);
        correct += best;
    }
    return correct / static_cast<double>(labels.size());
}

// 0.5 * sum of squared singular values beyond the first — the optimal rank-1
// residual, computed by an SVD wholly independent of the solver under test.
inline double rank1_tail(const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    double tail = 0.0;
    for (int i = 1; i < sv.size(); ++i) tail += sv(i) * sv(i);
    return 0.5 * tail;
}

// Random sparse non-negative matrix with approximately the given density.
inline senmfk::SparseMatrix random_sparse(int rows, int cols, double density, senmfk::Rng* rng) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (rng->uniform01() < density) {
                trips.emplace_back(r, c, rng->uniform(0.1, 2.0));
            }
        }
    }
    senmfk::SparseMatrix m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

// Random sparse symmetric non-negative matrix (zero diagonal optional).
inline senmfk::SparseMatrix random_sparse_symmetric(int n, double density, senmfk::Rng* rng) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = 0; r < n; ++r) {
        for (int c = r; c < n; ++c) {
            if (rng->uniform01() < density) {
                const double v = rng->uniform(0.1, 2.0);
                trips.emplace_back(r, c, v);
                if (c != r) trips.emplace_back(c, r, v);
            }
        }
    }
    senmfk::SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

inline Eigen::MatrixXd random_dense(int rows, int cols, senmfk::Rng* rng, double lo = 0.0,
                                    double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = rng->uniform(lo, hi);
        }
    }
    return m;
}

// Unit-normalized indicator vectors of the planted theme pools in the given
// vocabulary — the ground-truth topic directions of the synthetic corpus.
inline Eigen::MatrixXd planted_topic_vectors(const std::vector<std::vector<std::string>>& pools,
                                             const senmfk::Vocabulary& vocab) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(vocab.size(), static_cast<int>(pools.size()));
    for (size_t p = 0; p < pools.size(); ++p) {
        for (const auto& w : pools[p]) {
            const int idx = vocab.index_of(w);
            if (idx >= 0) t(idx, static_cast<int>(p)) = 1.0;
        }
        const double norm = t.col(static_cast<int>(p)).norm();
        if (norm > 0.0) t.col(static_cast<int>(p)) /= norm;
    }
    return t;
}

// Best one-to-one matching of columns in `a` to columns in `b` by brute-force
// permutation search (columns counts must match and stay small); returns the
// minimum cosine similarity over the matched pairs.
inline double best_match_min_cosine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const int k = static_cast<int>(a.cols());
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    auto cosine = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        const double d = x.norm() * y.norm();
        return d > 0.0 ? x.dot(y) / d : 0.0;
    };
    double best = -1.0;
    do {
        double worst = 2.0;
        for (int i = 0; i < k; ++i) {
            worst = std::min(worst, cosine(a.col(i), b.col(perm[i])));
        }
        best = std::max(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace oracle
