#include "senmfk/tsne.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "senmfk/errors.hpp"
#include "senmfk/rng.hpp"

namespace senmfk {

namespace {

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& points) {
    const int n = static_cast<int>(points.rows());
    const Eigen::VectorXd sq = points.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * (points * points.transpose());
    d.colwise() += sq;
    d.rowwise() += sq.transpose();
    d.diagonal().setZero();
    return d.cwiseMax(0.0);  // clamp tiny negative round-off
}

bool has_duplicate_rows(const Eigen::MatrixXd& points) {
    const int n = static_cast<int>(points.rows());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if ((points.row(i) - points.row(j)).cwiseAbs().maxCoeff() == 0.0) return true;
        }
    }
    return false;
}

}  // namespace

Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& points, double perplexity,
                                       std::uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    if (static_cast<double>(n) < 3.0 * perplexity) {
        throw ConfigError("perplexity too large: need N >= 3 * perplexity");
    }
    Eigen::MatrixXd pts = points;
    if (has_duplicate_rows(pts)) {
        Rng rng(mix_seed(seed, 1));
        for (int i = 0; i < pts.rows(); ++i) {
            for (int j = 0; j < pts.cols(); ++j) {
                pts(i, j) += rng.uniform(-1.0, 1.0) * 1e-10;
            }
        }
    }
    const Eigen::MatrixXd d = pairwise_sq_dists(pts);
    const double target_entropy = std::log(perplexity);  // nats

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd row(n);
    for (int i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_lo = -std::numeric_limits<double>::infinity();
        double beta_hi = std::numeric_limits<double>::infinity();
        double entropy = 0.0;
        for (int step = 0; step < 50; ++step) {
            // Gaussian kernel row at this beta, self excluded.
            double sum = 0.0;
            double weighted = 0.0;  // sum of p_ij * d_ij before normalization
            for (int j = 0; j < n; ++j) {
                if (j == i) {
                    row(j) = 0.0;
                    continue;
                }
                row(j) = std::exp(-beta * d(i, j));
                sum += row(j);
                weighted += row(j) * d(i, j);
            }
            // H = ln(sum) + beta * E[d]; derived from p_j = exp(-beta d_j)/sum.
            entropy = std::log(sum) + beta * weighted / sum;
            const double diff = entropy - target_entropy;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) {
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = std::isinf(beta_lo) ? beta * 0.5 : 0.5 * (beta + beta_lo);
            }
        }
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) sum += row(j);
        }
        if (sum > 0.0) {
            p.row(i) = row.transpose() / sum;
        } else {
            // Fully degenerate row: spread uniformly over the others.
            for (int j = 0; j < n; ++j) {
                if (j != i) p(i, j) = 1.0 / static_cast<double>(n - 1);
            }
        }
        p(i, i) = 0.0;
    }
    return p;
}

Eigen::MatrixXd symmetrize_affinities(const Eigen::MatrixXd& p_cond) {
    const int n = static_cast<int>(p_cond.rows());
    if (p_cond.cols() != n) {
        throw ShapeError("conditional affinity matrix must be square");
    }
    return (p_cond + p_cond.transpose()) / (2.0 * static_cast<double>(n));
}

Embedding2D tsne_project(const Eigen::MatrixXd& points, const TsneOptions& opts) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) {
        throw ConfigError("t-SNE needs at least 2 points");
    }
    if (opts.iterations < 1) {
        throw ConfigError("iterations must be >= 1");
    }

    Eigen::MatrixXd p = symmetrize_affinities(
        conditional_affinities(points, opts.perplexity, opts.seed));

    // KL(P || Q) against the unexaggerated P; `factor` divides out any
    // exaggeration currently applied in place.
    auto kl_divergence = [&p, n](const Eigen::MatrixXd& num, double z, double factor) {
        double kl = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double pij = p(i, j) / factor;
                if (pij <= 0.0 || i == j) continue;
                const double qij = std::max(num(i, j) / z, 1e-12);
                kl += pij * std::log(pij / qij);
            }
        }
        return kl;
    };

    Embedding2D emb;
    emb.perplexity = opts.perplexity;
    emb.iterations = opts.iterations;

    Eigen::MatrixXd y(n, 2);
    {
        Rng rng(opts.seed);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 2; ++j) {
                y(i, j) = rng.normal() * 1e-4;
            }
        }
    }
    Eigen::MatrixXd uy = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
    Eigen::MatrixXd num(n, n);
    Eigen::MatrixXd grad(n, 2);

    p *= opts.early_exaggeration;
    double factor = opts.early_exaggeration;

    for (int iter = 0; iter < opts.iterations; ++iter) {
        // Student-t numerators and normalizer.
        double z = 0.0;
        for (int i = 0; i < n; ++i) {
            num(i, i) = 0.0;
            for (int j = i + 1; j < n; ++j) {
                const double dx = y(i, 0) - y(j, 0);
                const double dy = y(i, 1) - y(j, 1);
                const double v = 1.0 / (1.0 + dx * dx + dy * dy);
                num(i, j) = v;
                num(j, i) = v;
                z += 2.0 * v;
            }
        }
        // Gradient: 4 * sum_j (p_ij - q_ij) * num_ij * (y_i - y_j).
        grad.setZero();
        for (int i = 0; i < n; ++i) {
            double gx = 0.0;
            double gy = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double mult = (p(i, j) - num(i, j) / z) * num(i, j);
                gx += mult * (y(i, 0) - y(j, 0));
                gy += mult * (y(i, 1) - y(j, 1));
            }
            grad(i, 0) = 4.0 * gx;
            grad(i, 1) = 4.0 * gy;
        }

        const double momentum =
            iter < opts.momentum_switch_iter ? opts.initial_momentum : opts.final_momentum;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 2; ++j) {
                const bool same_sign = (grad(i, j) > 0.0) == (uy(i, j) > 0.0);
                gains(i, j) = same_sign ? gains(i, j) * 0.8 : gains(i, j) + 0.2;
                gains(i, j) = std::max(gains(i, j), 0.01);
                uy(i, j) = momentum * uy(i, j) - opts.learning_rate * gains(i, j) * grad(i, j);
                y(i, j) += uy(i, j);
            }
        }
        y.rowwise() -= y.colwise().mean();

        if (iter + 1 == opts.exaggeration_iters && factor != 1.0) {
            p /= factor;
            factor = 1.0;
        }
        if ((iter + 1) % 50 == 0 || iter + 1 == opts.iterations) {
            emb.kl_trace.emplace_back(iter + 1, kl_divergence(num, z, factor));
        }
    }

    emb.final_kl = emb.kl_trace.empty() ? 0.0 : emb.kl_trace.back().second;
    emb.coords = std::move(y);
    return emb;
}

void save_embedding(const Embedding2D& emb, const std::vector<std::string>& doc_ids,
                    const std::vector<int>& cluster_labels, const std::string& path) {
    const int n = static_cast<int>(emb.coords.rows());
    if (static_cast<int>(doc_ids.size()) != n || static_cast<int>(cluster_labels.size()) != n) {
        throw ShapeError("embedding, doc ids, and cluster labels must agree in length");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", emb.perplexity);
    out << "# perplexity " << buf << " iterations " << emb.iterations << " final_kl ";
    std::snprintf(buf, sizeof(buf), "%.17g", emb.final_kl);
    out << buf << '\n';
    out << "doc_id,x,y,cluster\n";
    for (int i = 0; i < n; ++i) {
        out << doc_ids[i] << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", emb.coords(i, 0));
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", emb.coords(i, 1));
        out << buf << ',' << cluster_labels[i] << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Embedding2D load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path);
    Embedding2D emb;
    std::vector<std::array<double, 2>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            while (hs >> key) {
                if (key == "perplexity") hs >> emb.perplexity;
                else if (key == "iterations") hs >> emb.iterations;
                else if (key == "final_kl") hs >> emb.final_kl;
            }
            continue;
        }
        if (line.rfind("doc_id,", 0) == 0) continue;
        std::istringstream ss(line);
        std::string field;
        std::array<double, 2> xy{};
        if (!std::getline(ss, field, ',')) continue;        // doc_id
        if (!std::getline(ss, field, ',')) continue;
        xy[0] = std::stod(field);
        if (!std::getline(ss, field, ',')) continue;
        xy[1] = std::stod(field);
        rows.push_back(xy);
    }
    emb.coords.resize(static_cast<int>(rows.size()), 2);
    for (size_t i = 0; i < rows.size(); ++i) {
        emb.coords(static_cast<int>(i), 0) = rows[i][0];
        emb.coords(static_cast<int>(i), 1) = rows[i][1];
    }
    return emb;
}

void save_scatter_svg(const Embedding2D& emb, const std::vector<int>& cluster_labels,
                      const std::string& path) {
    const int n = static_cast<int>(emb.coords.rows());
    if (static_cast<int>(cluster_labels.size()) != n) {
        throw ShapeError("cluster labels must match embedding length");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);

    const double margin = 20.0;
    const double size = 800.0;
    double xmin = 0.0;
    double xmax = 1.0;
    double ymin = 0.0;
    double ymax = 1.0;
    if (n > 0) {
        xmin = emb.coords.col(0).minCoeff();
        xmax = emb.coords.col(0).maxCoeff();
        ymin = emb.coords.col(1).minCoeff();
        ymax = emb.coords.col(1).maxCoeff();
    }
    const double xspan = std::max(xmax - xmin, 1e-9);
    const double yspan = std::max(ymax - ymin, 1e-9);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << static_cast<int>(size)
        << "\" height=\"" << static_cast<int>(size) << "\" viewBox=\"0 0 "
        << static_cast<int>(size) << ' ' << static_cast<int>(size) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    char buf[128];
    for (int i = 0; i < n; ++i) {
        const double px = margin + (emb.coords(i, 0) - xmin) / xspan * (size - 2.0 * margin);
        const double py = margin + (ymax - emb.coords(i, 1)) / yspan * (size - 2.0 * margin);
        // Golden-angle hue walk gives well-spread, stable cluster colors.
        const int hue = static_cast<int>(
            std::fmod(static_cast<double>(std::max(cluster_labels[i], 0)) * 137.508, 360.0));
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"hsl(%d,65%%,45%%)\" "
                      "fill-opacity=\"0.75\"/>\n",
                      px, py, hue);
        out << buf;
    }
    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace senmfk
