#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "senmfk/errors.hpp"
#include "senmfk/model_select.hpp"
#include "senmfk/rng.hpp"
#include "senmfk/silhouette.hpp"
#include "fixture_corpus.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace senmfk;
using testsupport::TempDir;

namespace {

Eigen::MatrixXd unit_columns(Eigen::MatrixXd m) {
    for (int j = 0; j < m.cols(); ++j) {
        const double norm = m.col(j).norm();
        if (norm > 0.0) m.col(j) /= norm;
    }
    return m;
}

// Tokenize-free path from the synthetic corpus to the matrix pair.
std::pair<TfidfMatrix, SppmiMatrix> planted_matrices(int n_docs, std::uint64_t seed) {
    fixture::FixtureOptions fo;
    fo.n_docs = n_docs;
    fo.seed = seed;
    auto docs = fixture::make_planted_corpus(fo);
    std::vector<TokenizedDoc> toks;
    for (const auto& d : docs) {
        toks.push_back({d.id, tokenize(d.text, default_stopwords())});
    }
    auto vocab = build_vocabulary(toks, 5, 0.7);
    auto tfidf = build_tfidf(toks, vocab);
    auto cooc = build_cooccurrence(toks, vocab, 5, true);
    auto sppmi = build_sppmi(cooc, 1.0, 5);
    return {tfidf, sppmi};
}

}  // namespace

TEST_SUITE("model_select") {
    TEST_CASE("perturbation keeps patterns, bounds every entry and mirrors noise") {
        Rng rng(3);
        auto x = oracle::random_sparse(15, 20, 0.4, &rng);
        auto m = oracle::random_sparse_symmetric(15, 0.4, &rng);
        const double eps = 0.05;
        auto [xp, mp] = perturb_pair(x, m, eps, 99);

        REQUIRE(xp.nonZeros() == x.nonZeros());
        REQUIRE(mp.nonZeros() == m.nonZeros());

        Eigen::MatrixXd xd = Eigen::MatrixXd(x), xpd = Eigen::MatrixXd(xp);
        for (int i = 0; i < xd.rows(); ++i) {
            for (int j = 0; j < xd.cols(); ++j) {
                if (xd(i, j) == 0.0) {
                    CHECK(xpd(i, j) == 0.0);
                } else {
                    CHECK(xpd(i, j) >= (1.0 - eps) * xd(i, j) - 1e-15);
                    CHECK(xpd(i, j) <= (1.0 + eps) * xd(i, j) + 1e-15);
                }
            }
        }
        Eigen::MatrixXd mpd = Eigen::MatrixXd(mp);
        CHECK((mpd - mpd.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((mpd - Eigen::MatrixXd(m)).cwiseAbs().maxCoeff() > 0.0);

        auto [xp2, mp2] = perturb_pair(x, m, eps, 99);
        CHECK((Eigen::MatrixXd(xp2) - xpd).cwiseAbs().maxCoeff() == 0.0);
        auto [xp3, mp3] = perturb_pair(x, m, eps, 100);
        CHECK((Eigen::MatrixXd(xp3) - xpd).cwiseAbs().maxCoeff() > 0.0);
    }

    TEST_CASE("perturbation config is validated") {
        PerturbationConfig cfg;
        cfg.n_perturbations = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.n_perturbations = 10;
        cfg.noise_epsilon = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }

    TEST_CASE("identical runs cluster with silhouette one") {
        Rng rng(11);
        Eigen::MatrixXd w = unit_columns(oracle::random_dense(20, 3, &rng, 0.1, 1.0));
        std::vector<DenseMatrix> runs(6, w);
        auto clustering = cluster_topic_columns(runs, 3);
        CHECK(clustering.silhouette.min_cluster == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(clustering.silhouette.mean == doctest::Approx(1.0).epsilon(1e-12));
        // Medoids reproduce the original columns up to ordering.
        CHECK(oracle::best_match_min_cosine(clustering.medoids, w) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("column permutations across runs are undone by the matching") {
        Rng rng(13);
        Eigen::MatrixXd w = unit_columns(oracle::random_dense(20, 4, &rng, 0.1, 1.0));
        std::vector<DenseMatrix> runs;
        std::vector<int> perm{0, 1, 2, 3};
        for (int r = 0; r < 5; ++r) {
            Eigen::MatrixXd shuffled(20, 4);
            for (int j = 0; j < 4; ++j) shuffled.col(j) = w.col(perm[j]);
            runs.push_back(shuffled);
            std::next_permutation(perm.begin(), perm.end());
        }
        auto clustering = cluster_topic_columns(runs, 4);
        CHECK(clustering.silhouette.min_cluster == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("every run contributes exactly one column to each cluster") {
        Rng rng(17);
        std::vector<DenseMatrix> runs;
        for (int r = 0; r < 7; ++r) {
            runs.push_back(oracle::random_dense(12, 4, &rng, 0.01, 1.0));
        }
        auto clustering = cluster_topic_columns(runs, 4);
        REQUIRE(clustering.assignment.size() == 7);
        for (const auto& row : clustering.assignment) {
            std::set<int> seen(row.begin(), row.end());
            CHECK(seen.size() == 4);
            CHECK(*seen.begin() == 0);
            CHECK(*seen.rbegin() == 3);
        }
    }

    TEST_CASE("a consistent column scores higher than a noise column") {
        Rng rng(23);
        Eigen::VectorXd common = oracle::random_dense(16, 1, &rng, 0.1, 1.0);
        std::vector<DenseMatrix> runs;
        for (int r = 0; r < 6; ++r) {
            Eigen::MatrixXd w(16, 2);
            w.col(0) = common + 0.01 * oracle::random_dense(16, 1, &rng);
            w.col(1) = oracle::random_dense(16, 1, &rng, 0.01, 1.0);
            runs.push_back(w);
        }
        auto clustering = cluster_topic_columns(runs, 2);
        // One cluster is tight (the near-identical columns), one is diffuse.
        const double best = std::max(clustering.silhouette.per_cluster[0],
                                     clustering.silhouette.per_cluster[1]);
        const double worst = std::min(clustering.silhouette.per_cluster[0],
                                      clustering.silhouette.per_cluster[1]);
        CHECK(best > 0.9);
        CHECK(worst < best);
    }

    TEST_CASE("silhouette matches the brute force oracle") {
        Rng rng(29);
        for (int rep = 0; rep < 8; ++rep) {
            const int n = 20 + static_cast<int>(rng.below(60));
            const int c = 2 + static_cast<int>(rng.below(4));
            Eigen::MatrixXd points = oracle::random_dense(6, n, &rng, 0.0, 1.0);
            std::vector<int> labels(n);
            for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(rng.below(c));
            for (int j = 0; j < c; ++j) labels[j] = j;  // keep every cluster occupied

            auto got = cosine_silhouette(points, labels, c);
            auto [per_point, mean] = oracle::silhouette_brute(points, labels, c);
            REQUIRE(got.per_point.size() == per_point.size());
            for (size_t i = 0; i < per_point.size(); ++i) {
                CHECK(got.per_point[i] == doctest::Approx(per_point[i]).epsilon(1e-10));
            }
            CHECK(got.mean == doctest::Approx(mean).epsilon(1e-10));
        }
    }

    TEST_CASE("silhouette conventions and validation") {
        Eigen::MatrixXd points(2, 4);
        points << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;
        // All identical points in two clusters: a = b = 0 everywhere.
        auto res = cosine_silhouette(points, {0, 0, 1, 1}, 2);
        CHECK(res.mean == 0.0);
        CHECK(res.min_cluster == 0.0);

        // Singleton cluster scores zero.
        Eigen::MatrixXd p2(2, 3);
        p2 << 1.0, 0.9, 0.0, 0.1, 0.2, 1.0;
        auto res2 = cosine_silhouette(p2, {0, 0, 1}, 2);
        CHECK(res2.per_point[2] == 0.0);

        CHECK_THROWS_AS(cosine_silhouette(points, {0, 0, 0, 0}, 1), ConfigError);
        CHECK_THROWS_AS(cosine_silhouette(points, {0, 0, 0, 0}, 2), ConfigError);
        CHECK_THROWS_AS(cosine_silhouette(points, {0, 0, 5, 1}, 2), ConfigError);
    }

    TEST_CASE("well separated tight clusters score near one") {
        Rng rng(31);
        Eigen::MatrixXd points(8, 30);
        for (int i = 0; i < 30; ++i) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
            v(i % 3) = 1.0;
            for (int d = 0; d < 8; ++d) v(d) += 0.01 * rng.uniform01();
            points.col(i) = v;
        }
        std::vector<int> labels(30);
        for (int i = 0; i < 30; ++i) labels[i] = i % 3;
        auto res = cosine_silhouette(points, labels, 3);
        CHECK(res.mean > 0.9);
        CHECK(res.min_cluster > 0.9);
    }

    TEST_CASE("stability sweep recovers the planted topic count") {
        auto [tfidf, sppmi] = planted_matrices(120, 7);
        PerturbationConfig pcfg;
        pcfg.n_perturbations = 6;
        pcfg.noise_epsilon = 0.03;
        pcfg.seed = 42;
        SelectKOptions opts;
        opts.screen_max_iter = 150;
        opts.screen_tol = 1e-4;
        auto result = select_k(tfidf, sppmi, 1.0, {2, 3, 4, 5}, pcfg, opts);

        CHECK(result.k_selected == 3);
        CHECK_FALSE(result.below_threshold);
        REQUIRE(result.profile.entries.size() == 4);
        for (const auto& e : result.profile.entries) {
            if (e.k == 3) CHECK(e.min_silhouette >= 0.75);
            CHECK(e.mean_rel_error > 0.0);
            CHECK(e.mean_rel_error < 1.0);
        }
        CHECK(result.model.k == 3);
        CHECK(result.model.W.cols() == 3);
        CHECK(result.clustering.medoids.cols() == 3);

        // Medoids align with the planted themes.
        fixture::FixtureOptions fo;
        fo.n_docs = 120;
        fo.seed = 7;
        auto docs = fixture::make_planted_corpus(fo);
        std::vector<TokenizedDoc> toks;
        for (const auto& d : docs) toks.push_back({d.id, tokenize(d.text, default_stopwords())});
        auto vocab = build_vocabulary(toks, 5, 0.7);
        auto truth = oracle::planted_topic_vectors(fixture::theme_pools(), vocab);
        CHECK(oracle::best_match_min_cosine(result.clustering.medoids, truth) >= 0.9);
    }

    TEST_CASE("selection is deterministic") {
        auto [tfidf, sppmi] = planted_matrices(80, 9);
        PerturbationConfig pcfg;
        pcfg.n_perturbations = 4;
        pcfg.seed = 5;
        SelectKOptions opts;
        opts.screen_max_iter = 80;
        auto a = select_k(tfidf, sppmi, 1.0, {2, 3, 4}, pcfg, opts);
        auto b = select_k(tfidf, sppmi, 1.0, {2, 3, 4}, pcfg, opts);
        CHECK(a.k_selected == b.k_selected);
        REQUIRE(a.profile.entries.size() == b.profile.entries.size());
        for (size_t i = 0; i < a.profile.entries.size(); ++i) {
            CHECK(a.profile.entries[i].min_silhouette == b.profile.entries[i].min_silhouette);
            CHECK(a.profile.entries[i].mean_rel_error == b.profile.entries[i].mean_rel_error);
        }
        CHECK((a.model.W - b.model.W).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.model.H - b.model.H).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("worker count does not change the result") {
        auto [tfidf, sppmi] = planted_matrices(80, 9);
        PerturbationConfig pcfg;
        pcfg.n_perturbations = 4;
        pcfg.seed = 5;
        SelectKOptions opts;
        opts.screen_max_iter = 80;
        opts.n_workers = 1;
        auto serial = select_k(tfidf, sppmi, 1.0, {2, 3}, pcfg, opts);
        opts.n_workers = 4;
        auto parallel = select_k(tfidf, sppmi, 1.0, {2, 3}, pcfg, opts);
        CHECK(serial.k_selected == parallel.k_selected);
        CHECK((serial.model.W - parallel.model.W).cwiseAbs().maxCoeff() == 0.0);
        for (size_t i = 0; i < serial.profile.entries.size(); ++i) {
            CHECK(serial.profile.entries[i].min_silhouette ==
                  parallel.profile.entries[i].min_silhouette);
        }
    }

    TEST_CASE("when nothing is stable the best candidate is flagged") {
        // Pure noise has no reproducible topic structure at any k.
        Rng rng(43);
        TfidfMatrix tfidf;
        tfidf.X = oracle::random_sparse(30, 40, 0.25, &rng);
        tfidf.n_docs = 40;
        SppmiMatrix sppmi;
        sppmi.M = oracle::random_sparse_symmetric(30, 0.25, &rng);
        PerturbationConfig pcfg;
        pcfg.n_perturbations = 5;
        pcfg.seed = 11;
        SelectKOptions opts;
        opts.screen_max_iter = 60;
        opts.stability_threshold = 0.999;  // unreachable on noise
        auto result = select_k(tfidf, sppmi, 1.0, {4, 5, 6}, pcfg, opts);
        CHECK(result.below_threshold);
        CHECK(result.k_selected >= 4);
        CHECK(result.k_selected <= 6);
        // The flagged k is the argmax of the minimum silhouette.
        double best = -2.0;
        int best_k = 0;
        for (const auto& e : result.profile.entries) {
            if (e.min_silhouette > best + 1e-15) {
                best = e.min_silhouette;
                best_k = e.k;
            }
        }
        CHECK(result.k_selected == best_k);
    }

    TEST_CASE("stability tables round trip through files") {
        TempDir dir("select");
        StabilityProfile profile;
        profile.threshold = 0.8;
        profile.entries = {{2, 0.91, 0.85, 0.41}, {3, 0.99, 0.97, 0.33}, {4, 0.5, -0.1, 0.3}};
        save_stability(profile, dir.str("stability.csv"));
        auto back = load_stability(dir.str("stability.csv"));
        CHECK(back.threshold == profile.threshold);
        REQUIRE(back.entries.size() == 3);
        for (size_t i = 0; i < 3; ++i) {
            CHECK(back.entries[i].k == profile.entries[i].k);
            CHECK(back.entries[i].mean_silhouette == profile.entries[i].mean_silhouette);
            CHECK(back.entries[i].min_silhouette == profile.entries[i].min_silhouette);
            CHECK(back.entries[i].mean_rel_error == profile.entries[i].mean_rel_error);
        }
    }

    TEST_CASE("k range must be valid") {
        auto [tfidf, sppmi] = planted_matrices(60, 3);
        PerturbationConfig pcfg;
        pcfg.n_perturbations = 2;
        SelectKOptions opts;
        CHECK_THROWS_AS(select_k(tfidf, sppmi, 1.0, {}, pcfg, opts), ConfigError);
        CHECK_THROWS_AS(select_k(tfidf, sppmi, 1.0, {0, 1}, pcfg, opts), ConfigError);
    }
}
