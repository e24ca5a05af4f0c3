#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace senmfk {

struct TsneOptions {
    double perplexity = 30.0;
    int iterations = 1000;
    std::uint64_t seed = 0;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
};

struct Embedding2D {
    Eigen::MatrixXd coords;  // N x 2
    double perplexity = 0.0;
    double final_kl = 0.0;
    int iterations = 0;
    std::vector<std::pair<int, double>> kl_trace;  // (iteration, KL vs unexaggerated P)
};

// Row-stochastic conditional Gaussian affinities over the input points (one
// row per point, diagonal 0): each row's bandwidth is found by binary search
// (at most 50 bisections, entropy tolerance 1e-5 nats) so that
// exp(entropy) matches the target perplexity. Points are rows of `points`.
// Exact duplicate points are first disambiguated by a seeded 1e-10 jitter.
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& points, double perplexity,
                                       std::uint64_t seed);

// Joint affinities P = (P_cond + P_cond^T) / (2N); symmetric, sums to 1.
Eigen::MatrixXd symmetrize_affinities(const Eigen::MatrixXd& p_cond);

// Exact (all-pairs) t-SNE to 2-D: Student-t output affinities, gradient
// descent with momentum and per-coordinate gains, early exaggeration, seeded
// Gaussian initialization scaled by 1e-4. Deterministic per seed. Throws
// ConfigError when N < 3 * perplexity.
Embedding2D tsne_project(const Eigen::MatrixXd& points, const TsneOptions& opts);

// Coordinates file: "doc_id,x,y,cluster" CSV.
void save_embedding(const Embedding2D& emb, const std::vector<std::string>& doc_ids,
                    const std::vector<int>& cluster_labels, const std::string& path);
Embedding2D load_embedding(const std::string& path);

// Self-contained SVG scatter, one color per cluster.
void save_scatter_svg(const Embedding2D& emb, const std::vector<int>& cluster_labels,
                      const std::string& path);

}  // namespace senmfk
