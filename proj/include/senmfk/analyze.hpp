#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "senmfk/factorize.hpp"
#include "senmfk/silhouette.hpp"
#include "senmfk/textprep.hpp"

namespace senmfk {

struct TopicReport {
    int topic_index = 0;
    std::string label;  // optional human-supplied name
    std::vector<std::pair<std::string, double>> top_terms;  // weight-descending
    double dominance_share = 0.0;
};

// Which topic leads each document: argmax over the document's H column, ties
// to the lowest topic index; all-zero columns fall into the unassigned
// bucket (dominant = -1).
struct DominanceDistribution {
    std::vector<double> shares;       // per topic, counts / N
    std::vector<std::int64_t> counts; // per topic
    double unassigned_share = 0.0;
    std::vector<int> dominant;        // per document
    // Share captured by topics individually below the aggregation threshold
    // (the report's "others" bucket).
    double others_share = 0.0;
    double others_threshold = 0.02;
};

struct DocumentClusterAssignment {
    std::vector<int> labels;  // per document, in [0, n_clusters)
    int n_clusters = 0;
    DenseMatrix cluster_means;  // k x C mean mixture per cluster
    bool degenerate = false;    // all documents identical -> single cluster
    double mean_silhouette = 0.0;
    double min_silhouette = 0.0;
    // The silhouette sweep over candidate C values (parallel arrays).
    std::vector<int> candidate_c;
    std::vector<double> candidate_min_silhouette;
    bool below_threshold = false;
};

struct ClusterOptions {
    int c_min = 2;
    int c_max = 20;
    double stability_threshold = 0.75;
    int restarts = 4;
    int max_iter = 100;
    std::uint64_t seed = 0;
    // Silhouette cost is quadratic in point count; above this cap a seeded
    // subsample scores the clustering instead.
    int silhouette_sample_cap = 2000;
};

// Per-topic ranked term lists with dominance shares, sorted by dominance
// descending (ties by topic index). Tie-breaking within a topic's term
// ranking is by vocabulary index.
std::vector<TopicReport> topic_report(const FactorModel& model, const Vocabulary& vocab,
                                      int n_top,
                                      const std::map<int, std::string>& labels = {});

DominanceDistribution dominance_distribution(const FactorModel& model);

// L1-normalizes H columns into topic mixtures, then clusters them with
// cosine k-means (k-means++ seeding, deterministic restarts), choosing the
// cluster count by the same minimum-silhouette threshold rule used for topic
// stability.
DocumentClusterAssignment cluster_documents(const FactorModel& model, const ClusterOptions& opts);

// Fixed cluster count variant (no C sweep).
DocumentClusterAssignment cluster_documents_fixed_c(const FactorModel& model, int c,
                                                    const ClusterOptions& opts);

// Report writers.
void save_topic_reports(const std::vector<TopicReport>& reports, const std::string& path);
void save_dominance(const DominanceDistribution& dist, const std::string& path);
void save_clusters(const DocumentClusterAssignment& assign,
                   const std::vector<std::string>& doc_ids, const std::string& path);

// Topic label file: one "index<TAB>label" per line.
std::map<int, std::string> load_topic_labels(const std::string& path);

}  // namespace senmfk
