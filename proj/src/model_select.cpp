#include "senmfk/model_select.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "senmfk/assignment.hpp"
#include "senmfk/errors.hpp"
#include "senmfk/rng.hpp"

namespace senmfk {

void PerturbationConfig::validate() const {
    if (n_perturbations < 2) {
        throw ConfigError("n_perturbations must be >= 2");
    }
    if (noise_epsilon <= 0.0 || noise_epsilon >= 1.0) {
        throw ConfigError("noise_epsilon must lie in (0, 1)");
    }
}

std::pair<SparseMatrix, SparseMatrix> perturb_pair(const SparseMatrix& x, const SparseMatrix& m,
                                                   double epsilon, std::uint64_t seed) {
    if (epsilon <= 0.0 || epsilon >= 1.0) {
        throw ConfigError("epsilon must lie in (0, 1)");
    }
    Rng rng(seed);

    // X: one draw per stored entry, in storage order.
    SparseMatrix xp = x;
    for (int col = 0; col < xp.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(xp, col); it; ++it) {
            it.valueRef() *= rng.uniform(1.0 - epsilon, 1.0 + epsilon);
        }
    }

    // M: draw only for row <= col, mirror to keep symmetry exact.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(m.nonZeros()));
    for (int col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
            if (it.row() > it.col()) continue;
            const double v = it.value() * rng.uniform(1.0 - epsilon, 1.0 + epsilon);
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), v);
            if (it.row() < it.col()) {
                trips.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()), v);
            }
        }
    }
    SparseMatrix mp(m.rows(), m.cols());
    mp.setFromTriplets(trips.begin(), trips.end());
    mp.makeCompressed();
    return {std::move(xp), std::move(mp)};
}

namespace {

void normalize_columns(DenseMatrix* m) {
    for (int j = 0; j < m->cols(); ++j) {
        const double norm = m->col(j).norm();
        if (norm > 0.0) m->col(j) /= norm;
    }
}

}  // namespace

TopicClustering cluster_topic_columns(const std::vector<DenseMatrix>& runs, int k) {
    if (runs.empty()) {
        throw ConfigError("cluster_topic_columns needs at least one run");
    }
    const int f = static_cast<int>(runs[0].rows());
    for (const auto& w : runs) {
        if (w.rows() != f || w.cols() != k) {
            throw ShapeError("every run must be F x k");
        }
    }
    const int n_runs = static_cast<int>(runs.size());

    TopicClustering out;
    out.medoids = runs[0];
    normalize_columns(&out.medoids);
    out.assignment.assign(n_runs, std::vector<int>(k, 0));

    for (int round = 0; round < 100; ++round) {
        bool changed = false;
        // Match each run's columns to the current medoids.
        for (int r = 0; r < n_runs; ++r) {
            DenseMatrix w = runs[r];
            normalize_columns(&w);
            const DenseMatrix sim = w.transpose() * out.medoids;  // columns x clusters
            const std::vector<int> col_to_cluster = solve_assignment_max(sim);
            if (col_to_cluster != out.assignment[r]) {
                changed = true;
                out.assignment[r] = col_to_cluster;
            }
        }
        // Medoid = normalized mean of cluster members.
        DenseMatrix sums = DenseMatrix::Zero(f, k);
        for (int r = 0; r < n_runs; ++r) {
            DenseMatrix w = runs[r];
            normalize_columns(&w);
            for (int j = 0; j < k; ++j) {
                sums.col(out.assignment[r][j]) += w.col(j);
            }
        }
        normalize_columns(&sums);
        out.medoids = sums;
        if (!changed && round > 0) break;
    }

    // Silhouette over the pooled columns with their cluster labels.
    DenseMatrix points(f, n_runs * k);
    std::vector<int> labels(static_cast<size_t>(n_runs) * k);
    for (int r = 0; r < n_runs; ++r) {
        for (int j = 0; j < k; ++j) {
            points.col(r * k + j) = runs[r].col(j);
            labels[static_cast<size_t>(r) * k + j] = out.assignment[r][j];
        }
    }
    out.silhouette = cosine_silhouette(points, labels, k);
    return out;
}

namespace {

struct PerturbationRun {
    DenseMatrix w;
    double rel_error = 0.0;
};

// Runs `jobs` closures indexed 0..n-1 on up to n_workers threads; each job
// writes only its own result slot, so the outcome is order-independent.
template <typename Fn>
void run_jobs(int n_jobs, int n_workers, Fn&& job) {
    const int workers = std::max(1, std::min(n_workers, n_jobs));
    if (workers == 1) {
        for (int i = 0; i < n_jobs; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n_jobs) break;
                job(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

SelectKResult select_k(const TfidfMatrix& x, const SppmiMatrix& m, double lambda,
                       const std::vector<int>& k_range, const PerturbationConfig& pcfg,
                       const SelectKOptions& opts) {
    pcfg.validate();
    if (k_range.empty()) {
        throw ConfigError("k_range must be non-empty");
    }
    for (int k : k_range) {
        if (k < 2) throw ConfigError("candidate k must be >= 2");
    }

    const int n_pert = pcfg.n_perturbations;
    const int n_k = static_cast<int>(k_range.size());
    const int n_jobs = n_k * n_pert;
    std::vector<PerturbationRun> slots(n_jobs);

    run_jobs(n_jobs, opts.n_workers, [&](int job) {
        const int k_idx = job / n_pert;
        const int i = job % n_pert;
        const int k = k_range[k_idx];
        const auto [xp, mp] = perturb_pair(
            x.X, m.M, pcfg.noise_epsilon,
            mix_seed(pcfg.seed, static_cast<std::uint64_t>(k), 2 * static_cast<std::uint64_t>(i)));
        TfidfMatrix xt;
        xt.X = xp;
        xt.n_docs = x.n_docs;
        SppmiMatrix mt;
        mt.M = mp;
        mt.window = m.window;
        mt.shift = m.shift;
        const AugmentedMatrix ap = concatenate(xt, mt, lambda);
        FitOptions fo;
        fo.max_iter = opts.screen_max_iter;
        fo.tol = opts.screen_tol;
        fo.seed = mix_seed(pcfg.seed, static_cast<std::uint64_t>(k),
                           2 * static_cast<std::uint64_t>(i) + 1);
        const FactorModel model = nmf_fit(ap, k, fo);
        slots[job].w = model.W;
        slots[job].rel_error =
            std::sqrt(2.0 * model.objective_trace.back()) / ap.A.norm();
    });

    SelectKResult res;
    res.profile.threshold = opts.stability_threshold;
    std::vector<TopicClustering> clusterings(n_k);
    for (int k_idx = 0; k_idx < n_k; ++k_idx) {
        std::vector<DenseMatrix> ws;
        ws.reserve(n_pert);
        double err_sum = 0.0;
        for (int i = 0; i < n_pert; ++i) {
            ws.push_back(slots[k_idx * n_pert + i].w);
            err_sum += slots[k_idx * n_pert + i].rel_error;
        }
        clusterings[k_idx] = cluster_topic_columns(ws, k_range[k_idx]);
        KStability st;
        st.k = k_range[k_idx];
        st.mean_silhouette = clusterings[k_idx].silhouette.mean;
        st.min_silhouette = clusterings[k_idx].silhouette.min_cluster;
        st.mean_rel_error = err_sum / static_cast<double>(n_pert);
        res.profile.entries.push_back(st);
    }

    // Largest k meeting the threshold; otherwise the k with the best minimum
    // silhouette (smallest such k on ties), flagged.
    int chosen_idx = -1;
    for (int k_idx = 0; k_idx < n_k; ++k_idx) {
        if (res.profile.entries[k_idx].min_silhouette >= opts.stability_threshold) {
            if (chosen_idx < 0 ||
                res.profile.entries[k_idx].k > res.profile.entries[chosen_idx].k) {
                chosen_idx = k_idx;
            }
        }
    }
    if (chosen_idx < 0) {
        res.below_threshold = true;
        chosen_idx = 0;
        for (int k_idx = 1; k_idx < n_k; ++k_idx) {
            if (res.profile.entries[k_idx].min_silhouette >
                res.profile.entries[chosen_idx].min_silhouette) {
                chosen_idx = k_idx;
            }
        }
    }
    res.k_selected = k_range[chosen_idx];
    res.clustering = clusterings[chosen_idx];

    // Final refit on unperturbed data from the cluster medoids (H drawn from
    // the base seed).
    const AugmentedMatrix a = concatenate(x, m, lambda);
    const int f = static_cast<int>(a.A.rows());
    const int cols = static_cast<int>(a.A.cols());
    const double mean_a = a.A.sum() / (static_cast<double>(f) * static_cast<double>(cols));
    auto [w_rand, h_rand] = init_factors(f, cols, res.k_selected, mean_a, pcfg.seed);
    (void)w_rand;
    FitOptions fo;
    fo.max_iter = opts.final_max_iter;
    fo.tol = opts.final_tol;
    fo.seed = pcfg.seed;
    fo.w_init = res.clustering.medoids;
    fo.h_init = std::move(h_rand);
    res.model = nmf_fit(a, res.k_selected, fo);
    return res;
}

void save_stability(const StabilityProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", profile.threshold);
    out << "# stability_threshold " << buf << '\n';
    out << "k,mean_silhouette,min_silhouette,mean_rel_error\n";
    for (const auto& e : profile.entries) {
        out << e.k;
        std::snprintf(buf, sizeof(buf), "%.17g", e.mean_silhouette);
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", e.min_silhouette);
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", e.mean_rel_error);
        out << ',' << buf << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

StabilityProfile load_stability(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stability file: " + path);
    StabilityProfile profile;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string key;
            if (ss >> key >> profile.threshold && key != "stability_threshold") {
                throw IoError("unexpected comment in stability file: " + path);
            }
            continue;
        }
        if (line.rfind("k,", 0) == 0) continue;  // header
        std::istringstream ss(line);
        KStability e;
        char comma = ',';
        if (ss >> e.k >> comma >> e.mean_silhouette >> comma >> e.min_silhouette >> comma >>
            e.mean_rel_error) {
            profile.entries.push_back(e);
        }
    }
    return profile;
}

}  // namespace senmfk
