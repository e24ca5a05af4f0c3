#include "senmfk/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "senmfk/errors.hpp"
#include "senmfk/rng.hpp"

namespace senmfk {

namespace {

constexpr double kEps = 1e-16;  // division guard in the multiplicative updates

// 0.5 * ||S - W*H||^2 accumulated column by column, so the sparse operand is
// never densified as a whole.
double residual_objective(const SparseMatrix& s, const DenseMatrix& w, const DenseMatrix& h) {
    if (s.rows() != w.rows() || s.cols() != h.cols() || w.cols() != h.rows()) {
        throw ShapeError("residual shapes inconsistent");
    }
    double acc = 0.0;
    Eigen::VectorXd col(s.rows());
    for (int c = 0; c < s.cols(); ++c) {
        col.noalias() = -(w * h.col(c));
        for (SparseMatrix::InnerIterator it(s, c); it; ++it) {
            col(it.row()) += it.value();
        }
        acc += col.squaredNorm();
    }
    return 0.5 * acc;
}

}  // namespace

std::pair<DenseMatrix, DenseMatrix> init_factors(int n_rows, int n_cols, int k, double mean_a,
                                                 std::uint64_t seed) {
    Rng rng(seed);
    const double scale = std::sqrt(std::max(mean_a, 0.0) / static_cast<double>(k));
    DenseMatrix w(n_rows, k);
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < k; ++c) {
            w(r, c) = rng.uniform01() * scale;
        }
    }
    DenseMatrix h(k, n_cols);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            h(r, c) = rng.uniform01() * scale;
        }
    }
    return {std::move(w), std::move(h)};
}

FactorModel nmf_fit(const AugmentedMatrix& a, int k, const FitOptions& opts) {
    const int f = static_cast<int>(a.A.rows());
    const int cols = static_cast<int>(a.A.cols());
    const int n = a.n_docs;
    if (k < 1 || k > std::min(f, cols)) {
        throw ConfigError("k out of range [1, min(F, N+F)]");
    }
    if (opts.max_iter < 1) {
        throw ConfigError("max_iter must be >= 1");
    }
    if (opts.tol < 0.0) {
        throw ConfigError("tol must be >= 0 (0 disables early stopping)");
    }

    DenseMatrix w;
    DenseMatrix h;
    if (opts.w_init.has_value() || opts.h_init.has_value()) {
        if (!opts.w_init.has_value() || !opts.h_init.has_value()) {
            throw ConfigError("w_init and h_init must be supplied together");
        }
        w = *opts.w_init;
        h = *opts.h_init;
        if (w.rows() != f || w.cols() != k || h.rows() != k || h.cols() != cols) {
            throw ShapeError("initial factor shapes inconsistent with A and k");
        }
        if ((w.array() < 0.0).any() || (h.array() < 0.0).any()) {
            throw ConfigError("initial factors must be non-negative");
        }
    } else {
        const double mean_a = a.A.sum() / (static_cast<double>(f) * static_cast<double>(cols));
        std::tie(w, h) = init_factors(f, cols, k, mean_a, opts.seed);
    }

    const double a_sq = 0.5 * a.A.squaredNorm();

    FactorModel model;
    model.k = k;
    model.lambda = a.lambda;
    model.seed = opts.seed;
    model.objective_trace.reserve(opts.max_iter);

    double stride_anchor = std::numeric_limits<double>::infinity();
    DenseMatrix aht(f, k);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // H step: H <- H .* (W^T A) ./ (W^T W H + eps).
        {
            DenseMatrix wta = (a.A.transpose() * w).transpose();
            DenseMatrix wtw = w.transpose() * w;
            h.array() *= wta.array() / ((wtw * h).array() + kEps);
        }
        // W step: W <- W .* (A H^T) ./ (W (H H^T) + eps).
        DenseMatrix hht = h * h.transpose();
        aht.noalias() = a.A * h.transpose();
        w.array() *= aht.array() / ((w * hht).array() + kEps);

        // Augmented objective via the Gram expansion, reusing A H^T and H H^T
        // (both unchanged by the W step):
        // 0.5||A||^2 - <W, A H^T> + 0.5 <W^T W, H H^T>.
        const double obj = a_sq - (w.array() * aht.array()).sum() +
                           0.5 * ((w.transpose() * w).array() * hht.array()).sum();
        model.objective_trace.push_back(obj);
        model.iterations = iter + 1;

        if ((iter + 1) % 10 == 0) {
            const double rel =
                (stride_anchor - obj) / std::max(std::abs(stride_anchor), kEps);
            if (std::isfinite(stride_anchor) && rel < opts.tol) {
                model.converged = true;
                break;
            }
            stride_anchor = obj;
        }
    }

    if (opts.normalize_output) {
        for (int j = 0; j < k; ++j) {
            const double norm = w.col(j).norm();
            if (norm > 0.0) {
                w.col(j) /= norm;
                h.row(j) *= norm;
            }
        }
    }

    model.W = std::move(w);
    model.H = h.leftCols(n);
    if (a.lambda > 0.0) {
        model.G = h.rightCols(cols - n) / std::sqrt(a.lambda);
    } else {
        model.G = DenseMatrix::Zero(k, cols - n);
    }
    return model;
}

double objective(const SparseMatrix& x, const SparseMatrix& m, const DenseMatrix& w,
                 const DenseMatrix& h, const DenseMatrix& g, double lambda) {
    double obj = residual_objective(x, w, h);
    if (lambda > 0.0) {
        obj += lambda * residual_objective(m, w, g);
    }
    return obj;
}

double augmented_objective(const SparseMatrix& a, const DenseMatrix& w,
                           const DenseMatrix& h_aug) {
    return residual_objective(a, w, h_aug);
}

void save_model(const FactorModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    const int f = static_cast<int>(model.W.rows());
    const int n = static_cast<int>(model.H.cols());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", model.lambda);
    out << f << ' ' << n << ' ' << model.k << ' ' << buf << ' ' << model.seed << '\n';
    auto write_row_major = [&](const DenseMatrix& m) {
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
                out << buf << (c + 1 == m.cols() ? '\n' : ' ');
            }
        }
    };
    write_row_major(model.W);
    write_row_major(model.H);
    write_row_major(model.G);
    if (!out) throw IoError("write failed: " + path);
}

FactorModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    int f = 0;
    int n = 0;
    FactorModel model;
    if (!(in >> f >> n >> model.k >> model.lambda >> model.seed)) {
        throw IoError("malformed model header: " + path);
    }
    auto read_row_major = [&](int rows, int cols) {
        DenseMatrix m(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                if (!(in >> m(r, c))) {
                    throw IoError("truncated model file: " + path);
                }
            }
        }
        return m;
    };
    model.W = read_row_major(f, model.k);
    model.H = read_row_major(model.k, n);
    model.G = read_row_major(model.k, f);
    return model;
}

}  // namespace senmfk
