#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "senmfk/factorize.hpp"
#include "senmfk/matrices.hpp"
#include "senmfk/silhouette.hpp"

namespace senmfk {

struct PerturbationConfig {
    int n_perturbations = 20;
    double noise_epsilon = 0.03;
    std::uint64_t seed = 0;

    void validate() const;
};

// Result of clustering the topic columns gathered from an ensemble of runs:
// k clusters, each containing exactly one column from every run.
struct TopicClustering {
    DenseMatrix medoids;                       // F x k, unit columns
    std::vector<std::vector<int>> assignment;  // [run][column] -> cluster
    SilhouetteResult silhouette;
};

struct KStability {
    int k = 0;
    double mean_silhouette = 0.0;
    double min_silhouette = 0.0;
    double mean_rel_error = 0.0;
};

struct StabilityProfile {
    std::vector<KStability> entries;
    double threshold = 0.75;
};

struct SelectKOptions {
    double stability_threshold = 0.75;
    // Fit options for the perturbation-ensemble (screening) factorizations.
    int screen_max_iter = 200;
    double screen_tol = 1e-4;
    // Fit options for the final refit on unperturbed data.
    int final_max_iter = 500;
    double final_tol = 1e-5;
    int n_workers = 1;
};

struct SelectKResult {
    int k_selected = 0;
    bool below_threshold = false;  // no candidate met the stability threshold
    StabilityProfile profile;
    TopicClustering clustering;  // at k_selected
    FactorModel model;           // final refit on unperturbed data
};

// Multiplies every nonzero by an independent uniform draw from
// [1-epsilon, 1+epsilon]. X is perturbed entry-by-entry; M only on the upper
// triangle, mirrored, so symmetry is exact. Sparsity patterns unchanged.
std::pair<SparseMatrix, SparseMatrix> perturb_pair(const SparseMatrix& x, const SparseMatrix& m,
                                                   double epsilon, std::uint64_t seed);

// Greedy medoid clustering of topic columns under cosine distance with the
// one-column-per-run constraint: medoids start from run 0; each run's columns
// are matched to clusters by a max-similarity assignment; medoids are
// recomputed as normalized member means; repeat until stable.
TopicClustering cluster_topic_columns(const std::vector<DenseMatrix>& runs, int k);

// The full stability sweep: for each candidate k, factorize n_perturbations
// perturbed pairs, cluster the resulting topic columns, and score stability;
// pick the largest k whose minimum cluster silhouette meets the threshold
// (fallback: the k with maximal minimum silhouette, flagged). The returned
// model is a fresh fit on the unperturbed pair at k_selected, W initialized
// from the cluster medoids.
SelectKResult select_k(const TfidfMatrix& x, const SppmiMatrix& m, double lambda,
                       const std::vector<int>& k_range, const PerturbationConfig& pcfg,
                       const SelectKOptions& opts);

// Stability table persistence as CSV (k, mean_silhouette, min_silhouette,
// mean_rel_error; threshold recorded on a comment line).
void save_stability(const StabilityProfile& profile, const std::string& path);
StabilityProfile load_stability(const std::string& path);

}  // namespace senmfk
