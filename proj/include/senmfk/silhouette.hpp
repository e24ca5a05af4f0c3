#pragma once

#include <Eigen/Dense>

#include <vector>

namespace senmfk {

struct SilhouetteResult {
    std::vector<double> per_point;
    std::vector<double> per_cluster;  // mean over the cluster's points
    double mean = 0.0;                // mean over all points
    double min_cluster = 0.0;         // worst per-cluster mean
};

// Standard silhouette s(x) = (b(x) - a(x)) / max(a(x), b(x)) under cosine
// distance, where a is the mean distance to the point's own cluster
// (excluding itself) and b the smallest mean distance to another cluster.
// Conventions: singleton clusters score 0, and a = b = 0 scores 0. Points are
// columns; labels[i] in [0, n_clusters). Requires at least 2 clusters, each
// non-empty (ConfigError otherwise).
SilhouetteResult cosine_silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                                   int n_clusters);

}  // namespace senmfk
