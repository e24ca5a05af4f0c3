#include "senmfk/silhouette.hpp"

#include <algorithm>
#include <limits>

#include "senmfk/errors.hpp"

namespace senmfk {

SilhouetteResult cosine_silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                                   int n_clusters) {
    const int n = static_cast<int>(points.cols());
    if (static_cast<int>(labels.size()) != n) {
        throw ShapeError("label count does not match point count");
    }
    if (n_clusters < 2) {
        throw ConfigError("silhouette requires at least 2 clusters");
    }
    std::vector<int> sizes(n_clusters, 0);
    for (int i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= n_clusters) {
            throw ConfigError("label out of range");
        }
        ++sizes[labels[i]];
    }
    for (int c = 0; c < n_clusters; ++c) {
        if (sizes[c] == 0) {
            throw ConfigError("silhouette requires every cluster non-empty");
        }
    }

    // Unit-normalize columns (zero vectors stay zero: cosine similarity 0 to
    // everything, distance 1).
    Eigen::MatrixXd y = points;
    Eigen::VectorXd self_sim(n);
    for (int i = 0; i < n; ++i) {
        const double norm = y.col(i).norm();
        if (norm > 0.0) {
            y.col(i) /= norm;
            self_sim(i) = 1.0;
        } else {
            self_sim(i) = 0.0;
        }
    }
    // Summed member vectors per cluster turn "mean cosine distance from x to
    // cluster c" into a single dot product.
    Eigen::MatrixXd cluster_sum = Eigen::MatrixXd::Zero(points.rows(), n_clusters);
    for (int i = 0; i < n; ++i) {
        cluster_sum.col(labels[i]) += y.col(i);
    }

    SilhouetteResult res;
    res.per_point.assign(n, 0.0);
    res.per_cluster.assign(n_clusters, 0.0);
    for (int i = 0; i < n; ++i) {
        const int c = labels[i];
        if (sizes[c] == 1) {
            res.per_point[i] = 0.0;  // singleton convention
            continue;
        }
        const double sim_own = y.col(i).dot(cluster_sum.col(c)) - self_sim(i);
        const double a = 1.0 - sim_own / static_cast<double>(sizes[c] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int o = 0; o < n_clusters; ++o) {
            if (o == c) continue;
            const double sim_other = y.col(i).dot(cluster_sum.col(o));
            b = std::min(b, 1.0 - sim_other / static_cast<double>(sizes[o]));
        }
        // Distances are 1 - cosine of unit vectors: values below rounding
        // scale mean "identical at double precision", where the a = b = 0
        // convention must win rather than a ratio of rounding residues.
        constexpr double kZeroTol = 1e-12;
        const double denom = std::max(a, b);
        res.per_point[i] = denom > kZeroTol ? (b - a) / denom : 0.0;
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        res.per_cluster[labels[i]] += res.per_point[i];
        total += res.per_point[i];
    }
    res.mean = total / static_cast<double>(n);
    res.min_cluster = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_clusters; ++c) {
        res.per_cluster[c] /= static_cast<double>(sizes[c]);
        res.min_cluster = std::min(res.min_cluster, res.per_cluster[c]);
    }
    return res;
}

}  // namespace senmfk
