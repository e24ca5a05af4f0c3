#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "senmfk/matrices.hpp"

namespace senmfk {

using DenseMatrix = Eigen::MatrixXd;

struct FitOptions {
    int max_iter = 500;
    double tol = 1e-5;  // relative objective decrease per 10-iteration stride
    std::uint64_t seed = 0;
    // When set, used instead of seeded random initialization. w_init is F x k;
    // h_init is k x (N + F) over the augmented columns.
    std::optional<DenseMatrix> w_init;
    std::optional<DenseMatrix> h_init;
    bool normalize_output = true;
};

struct FactorModel {
    DenseMatrix W;  // F x k, columns are topics (unit L2 norm on output)
    DenseMatrix H;  // k x N, document coordinates in topic space
    DenseMatrix G;  // k x F, word-context coordinates
    int k = 0;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> objective_trace;  // augmented objective after each iteration
    int iterations = 0;
    bool converged = false;
};

// Seeded random initialization: entries i.i.d. uniform on (0,1) scaled by
// sqrt(mean_a / k), W drawn first then H, both row-major draw order.
std::pair<DenseMatrix, DenseMatrix> init_factors(int n_rows, int n_cols, int k, double mean_a,
                                                 std::uint64_t seed);

// Multiplicative-update factorization of the augmented matrix: finds
// non-negative W (F x k) and H_aug (k x (N+F)) locally minimizing
// 0.5 * ||A - W * H_aug||^2, then splits H_aug into H and G = trailing
// block / sqrt(lambda) (G = 0 when lambda = 0). Throws ConfigError when k is
// out of [1, min(F, N+F)].
FactorModel nmf_fit(const AugmentedMatrix& a, int k, const FitOptions& opts);

// The coupled objective exactly as defined:
// 0.5*||X - WH||_F^2 + (lambda/2)*||M - WG||_F^2 (M term skipped at
// lambda = 0). Throws ShapeError on inconsistent shapes.
double objective(const SparseMatrix& x, const SparseMatrix& m, const DenseMatrix& w,
                 const DenseMatrix& h, const DenseMatrix& g, double lambda);

// 0.5*||A - W*H_aug||_F^2 over the concatenated matrix — the other side of
// the objective identity, kept as an independent computation route.
double augmented_objective(const SparseMatrix& a, const DenseMatrix& w, const DenseMatrix& h_aug);

// Factor-file persistence (text header F, N, k, lambda, seed; then W, H, G
// row-major, %.17g).
void save_model(const FactorModel& model, const std::string& path);
FactorModel load_model(const std::string& path);

}  // namespace senmfk
