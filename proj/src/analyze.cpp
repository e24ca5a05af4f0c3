#include "senmfk/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "senmfk/errors.hpp"
#include "senmfk/rng.hpp"

namespace senmfk {

std::vector<TopicReport> topic_report(const FactorModel& model, const Vocabulary& vocab,
                                      int n_top, const std::map<int, std::string>& labels) {
    if (n_top < 1) {
        throw ConfigError("n_top must be >= 1");
    }
    if (model.W.rows() != vocab.size()) {
        throw ShapeError("W row count does not match vocabulary size");
    }
    const DominanceDistribution dom = dominance_distribution(model);
    std::vector<TopicReport> reports;
    reports.reserve(model.k);
    for (int j = 0; j < model.k; ++j) {
        TopicReport rep;
        rep.topic_index = j;
        auto it = labels.find(j);
        if (it != labels.end()) rep.label = it->second;
        rep.dominance_share = dom.shares[j];
        std::vector<int> order(vocab.size());
        std::iota(order.begin(), order.end(), 0);
        const auto& col = model.W;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (col(a, j) != col(b, j)) return col(a, j) > col(b, j);
            return a < b;
        });
        const int take = std::min<int>(n_top, vocab.size());
        rep.top_terms.reserve(take);
        for (int i = 0; i < take; ++i) {
            rep.top_terms.emplace_back(vocab.index_to_token[order[i]], col(order[i], j));
        }
        reports.push_back(std::move(rep));
    }
    std::sort(reports.begin(), reports.end(), [](const TopicReport& a, const TopicReport& b) {
        if (a.dominance_share != b.dominance_share) return a.dominance_share > b.dominance_share;
        return a.topic_index < b.topic_index;
    });
    return reports;
}

DominanceDistribution dominance_distribution(const FactorModel& model) {
    const int k = model.k;
    const int n = static_cast<int>(model.H.cols());
    DominanceDistribution dist;
    dist.counts.assign(k, 0);
    dist.shares.assign(k, 0.0);
    dist.dominant.assign(n, -1);
    std::int64_t unassigned = 0;
    for (int d = 0; d < n; ++d) {
        int best = -1;
        double best_v = 0.0;
        for (int t = 0; t < k; ++t) {
            const double v = model.H(t, d);
            if (v > best_v) {  // strict: ties keep the lowest index
                best_v = v;
                best = t;
            }
        }
        dist.dominant[d] = best;
        if (best < 0) {
            ++unassigned;
        } else {
            ++dist.counts[best];
        }
    }
    const double nd = static_cast<double>(n);
    for (int t = 0; t < k; ++t) {
        dist.shares[t] = static_cast<double>(dist.counts[t]) / nd;
        if (dist.shares[t] < dist.others_threshold) {
            dist.others_share += dist.shares[t];
        }
    }
    dist.unassigned_share = static_cast<double>(unassigned) / nd;
    return dist;
}

namespace {

// Columns scaled to unit L1 (mixtures); all-zero columns left zero.
DenseMatrix mixture_columns(const DenseMatrix& h) {
    DenseMatrix mix = h;
    for (int c = 0; c < mix.cols(); ++c) {
        const double sum = mix.col(c).sum();
        if (sum > 0.0) mix.col(c) /= sum;
    }
    return mix;
}

struct KmeansRun {
    std::vector<int> labels;
    DenseMatrix centroids;  // unit columns
    double objective = -std::numeric_limits<double>::infinity();
};

// Spherical k-means on unit columns: k-means++ seeding, max-dot assignment
// (ties to the lowest centroid index), normalized-mean centroids, empty
// clusters re-seeded from the worst-fit point.
KmeansRun spherical_kmeans(const DenseMatrix& y, int c, int max_iter, std::uint64_t seed) {
    const int n = static_cast<int>(y.cols());
    Rng rng(seed);
    KmeansRun run;
    run.centroids.resize(y.rows(), c);

    // k-means++ under cosine distance.
    std::vector<double> d2(n, 1.0);
    std::vector<int> chosen;
    chosen.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
    run.centroids.col(0) = y.col(chosen[0]);
    for (int j = 1; j < c; ++j) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double dist = 1.0 - y.col(i).dot(run.centroids.col(j - 1));
            d2[i] = j == 1 ? dist * dist : std::min(d2[i], dist * dist);
            total += d2[i];
        }
        int pick;
        if (total > 0.0) {
            const double u = rng.uniform01() * total;
            double acc = 0.0;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= u) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        }
        chosen.push_back(pick);
        run.centroids.col(j) = y.col(pick);
    }

    run.labels.assign(n, 0);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        // Assignment.
        const DenseMatrix sim = run.centroids.transpose() * y;  // c x n
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_v = sim(0, i);
            for (int j = 1; j < c; ++j) {
                if (sim(j, i) > best_v) {
                    best_v = sim(j, i);
                    best = j;
                }
            }
            if (run.labels[i] != best) {
                run.labels[i] = best;
                changed = true;
            }
        }
        // Update.
        DenseMatrix sums = DenseMatrix::Zero(y.rows(), c);
        std::vector<int> sizes(c, 0);
        for (int i = 0; i < n; ++i) {
            sums.col(run.labels[i]) += y.col(i);
            ++sizes[run.labels[i]];
        }
        for (int j = 0; j < c; ++j) {
            if (sizes[j] == 0) {
                // Re-seed from the point farthest from its centroid (ties to
                // the lowest index).
                int worst = 0;
                double worst_sim = std::numeric_limits<double>::infinity();
                for (int i = 0; i < n; ++i) {
                    const double s = y.col(i).dot(run.centroids.col(run.labels[i]));
                    if (s < worst_sim) {
                        worst_sim = s;
                        worst = i;
                    }
                }
                run.centroids.col(j) = y.col(worst);
                changed = true;
                continue;
            }
            const double norm = sums.col(j).norm();
            run.centroids.col(j) = sums.col(j);
            if (norm > 0.0) run.centroids.col(j) /= norm;
        }
        if (!changed && iter > 0) break;
    }

    run.objective = 0.0;
    for (int i = 0; i < n; ++i) {
        run.objective += y.col(i).dot(run.centroids.col(run.labels[i]));
    }
    return run;
}

// Seeded subsample of [0, n) without replacement (partial Fisher-Yates).
std::vector<int> sample_indices(int n, int take, std::uint64_t seed) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = 0; i < take; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Silhouette of a labeling, on a subsample when the corpus is large. Relabels
// the subsample's clusters compactly; returns {mean, min} or {0,0} when the
// subsample collapses to fewer than 2 clusters.
std::pair<double, double> sampled_silhouette(const DenseMatrix& y, const std::vector<int>& labels,
                                             int c, int cap, std::uint64_t seed) {
    const int n = static_cast<int>(y.cols());
    if (n <= cap) {
        const SilhouetteResult sil = cosine_silhouette(y, labels, c);
        return {sil.mean, sil.min_cluster};
    }
    const std::vector<int> idx = sample_indices(n, cap, seed);
    DenseMatrix ys(y.rows(), cap);
    std::vector<int> ls(cap);
    for (int i = 0; i < cap; ++i) {
        ys.col(i) = y.col(idx[i]);
        ls[i] = labels[idx[i]];
    }
    std::vector<int> remap(c, -1);
    int next = 0;
    for (int& l : ls) {
        if (remap[l] < 0) remap[l] = next++;
        l = remap[l];
    }
    if (next < 2) return {0.0, 0.0};
    const SilhouetteResult sil = cosine_silhouette(ys, ls, next);
    return {sil.mean, sil.min_cluster};
}

DocumentClusterAssignment cluster_at_c(const DenseMatrix& y, const DenseMatrix& mix, int c,
                                       const ClusterOptions& opts) {
    KmeansRun best;
    for (int r = 0; r < opts.restarts; ++r) {
        KmeansRun run = spherical_kmeans(
            y, c, opts.max_iter,
            mix_seed(opts.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r)));
        if (run.objective > best.objective) best = std::move(run);
    }
    DocumentClusterAssignment out;
    out.labels = best.labels;
    out.n_clusters = c;
    out.cluster_means = DenseMatrix::Zero(mix.rows(), c);
    std::vector<int> sizes(c, 0);
    for (int i = 0; i < static_cast<int>(best.labels.size()); ++i) {
        out.cluster_means.col(best.labels[i]) += mix.col(i);
        ++sizes[best.labels[i]];
    }
    for (int j = 0; j < c; ++j) {
        if (sizes[j] > 0) out.cluster_means.col(j) /= static_cast<double>(sizes[j]);
    }
    const auto [mean_sil, min_sil] =
        sampled_silhouette(y, out.labels, c, opts.silhouette_sample_cap, opts.seed);
    out.mean_silhouette = mean_sil;
    out.min_silhouette = min_sil;
    return out;
}

}  // namespace

DocumentClusterAssignment cluster_documents_fixed_c(const FactorModel& model, int c,
                                                    const ClusterOptions& opts) {
    if (c < 1 || c > model.H.cols()) {
        throw ConfigError("cluster count must lie in [1, n_docs]");
    }
    const DenseMatrix mix = mixture_columns(model.H);
    DenseMatrix y = mix;
    for (int i = 0; i < y.cols(); ++i) {
        const double norm = y.col(i).norm();
        if (norm > 0.0) y.col(i) /= norm;
    }
    return cluster_at_c(y, mix, c, opts);
}

DocumentClusterAssignment cluster_documents(const FactorModel& model, const ClusterOptions& opts) {
    const int n = static_cast<int>(model.H.cols());
    if (n < 2) {
        throw ConfigError("document clustering needs at least 2 documents");
    }
    if (opts.c_min < 2 || opts.c_max < opts.c_min) {
        throw ConfigError("cluster range must satisfy 2 <= c_min <= c_max");
    }
    const DenseMatrix mix = mixture_columns(model.H);

    // Degenerate corpus: every mixture identical -> one cluster, flagged.
    bool all_same = true;
    for (int i = 1; i < n && all_same; ++i) {
        if ((mix.col(i) - mix.col(0)).cwiseAbs().maxCoeff() > 0.0) all_same = false;
    }
    if (all_same) {
        DocumentClusterAssignment out;
        out.labels.assign(n, 0);
        out.n_clusters = 1;
        out.cluster_means = mix.col(0);
        out.degenerate = true;
        return out;
    }

    DenseMatrix y = mix;
    for (int i = 0; i < y.cols(); ++i) {
        const double norm = y.col(i).norm();
        if (norm > 0.0) y.col(i) /= norm;
    }

    const int c_max = std::min(opts.c_max, n);
    std::vector<DocumentClusterAssignment> results;
    std::vector<int> cs;
    for (int c = opts.c_min; c <= c_max; ++c) {
        results.push_back(cluster_at_c(y, mix, c, opts));
        cs.push_back(c);
    }
    // Same selection rule as topic stability: largest C meeting the
    // threshold, else the best minimum silhouette, flagged.
    int chosen = -1;
    for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
        if (results[i].min_silhouette >= opts.stability_threshold) chosen = i;
    }
    bool below = false;
    if (chosen < 0) {
        below = true;
        chosen = 0;
        for (int i = 1; i < static_cast<int>(cs.size()); ++i) {
            if (results[i].min_silhouette > results[chosen].min_silhouette) chosen = i;
        }
    }
    DocumentClusterAssignment out = std::move(results[chosen]);
    out.below_threshold = below;
    for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
        out.candidate_c.push_back(cs[i]);
        out.candidate_min_silhouette.push_back(results[i].min_silhouette);
    }
    return out;
}

void save_topic_reports(const std::vector<TopicReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    char buf[64];
    for (const auto& rep : reports) {
        std::snprintf(buf, sizeof(buf), "%.4f", 100.0 * rep.dominance_share);
        out << "topic " << rep.topic_index;
        if (!rep.label.empty()) out << " label " << rep.label;
        out << " dominance_pct " << buf << '\n';
        for (const auto& [token, weight] : rep.top_terms) {
            std::snprintf(buf, sizeof(buf), "%.17g", weight);
            out << "  " << token << ' ' << buf << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_dominance(const DominanceDistribution& dist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", dist.others_share);
    out << "# others_share " << buf << " threshold ";
    std::snprintf(buf, sizeof(buf), "%.17g", dist.others_threshold);
    out << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", dist.unassigned_share);
    out << "# unassigned_share " << buf << '\n';
    out << "topic,count,share,in_others\n";
    for (size_t t = 0; t < dist.shares.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%.17g", dist.shares[t]);
        out << t << ',' << dist.counts[t] << ',' << buf << ','
            << (dist.shares[t] < dist.others_threshold ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_clusters(const DocumentClusterAssignment& assign,
                   const std::vector<std::string>& doc_ids, const std::string& path) {
    if (doc_ids.size() != assign.labels.size()) {
        throw ShapeError("doc id count does not match assignment count");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "# n_clusters " << assign.n_clusters << (assign.degenerate ? " degenerate" : "")
        << '\n';
    out << "doc_id,cluster\n";
    for (size_t i = 0; i < doc_ids.size(); ++i) {
        out << doc_ids[i] << ',' << assign.labels[i] << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::map<int, std::string> load_topic_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label file: " + path);
    std::map<int, std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) continue;
        labels[std::stoi(line.substr(0, tab))] = line.substr(tab + 1);
    }
    return labels;
}

}  // namespace senmfk
