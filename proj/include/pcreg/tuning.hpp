#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pcreg/design.hpp"
#include "pcreg/solver.hpp"

namespace pcreg {

// b = floor(0.25 ln^2 p), clamped to [1, (p-1)/2]. Requires p >= 8.
int default_bandwidth(int p);

// t = 2 b.
int default_gap(int p);

enum class EstimatorKind { FL, SparseFL };

struct CvResult {
    double lambda2 = 0.0;
    double lambda1 = 0.0;              // 0 for FL
    std::vector<double> grid;          // lambda2 values, as given
    std::vector<double> curve;         // mean held-out MSE per grid point
    double lambda1_over_lambda2 = 0.0; // SparseFL ratio actually used
};

// K-fold CV over the lambda grid. Folds are contiguous chunks of a seeded
// random permutation of the observations, sizes differing by at most one.
// Ties on the curve resolve to the larger lambda. For SparseFL the l1
// penalty rides the same grid with lambda1 = sqrt(max diag(A^T A / n)) * lambda2.
CvResult cross_validate(const DesignMatrix& A, const Eigen::VectorXd& y,
                        const std::vector<double>& grid, int K,
                        EstimatorKind kind, uint64_t seed,
                        const SolverConfig& cfg = {});

struct TauResult {
    double tau = 0.0;
    bool no_signal = false;  // constant input: every permutation gives F == 0
};

// Threshold from B random entry-permutations of xhat. Statistic per
// permutation: max_i |F_i|. Returns the empirical (1-alpha) quantile
// (lowest value with empirical CDF >= 1-alpha).
TauResult permutation_tau(const Eigen::VectorXd& xhat, int b, int B,
                          double alpha, uint64_t seed);

// Pooled variant: the (1-alpha) quantile of all B * (p - 2b + 1) individual
// |F_i| values. A pointwise null rather than a familywise one; this is the
// pipeline default (the max statistic is dominated by the spread of segment
// levels and over-thresholds moderate jumps).
TauResult permutation_tau_pooled(const Eigen::VectorXd& xhat, int b, int B,
                                 double alpha, uint64_t seed);

struct BandwidthRule {
    bool log_rule = true;
    int fixed_b = 0;
    int resolve(int p) const;
};

struct TauRule {
    enum class Kind { PermutationPooled, Permutation, Fixed };
    Kind kind = Kind::PermutationPooled;
    int B = 100;
    double alpha = 0.05;
    double fixed_tau = 0.0;
    TauResult resolve(const Eigen::VectorXd& xhat, int b, uint64_t seed) const;
};

struct GapRule {
    bool twice_bandwidth = true;
    int fixed_t = 0;
    int resolve(int b) const;
};

struct TuningPlan {
    std::vector<double> lambda_grid;  // empty: derive from data
    int folds = 5;
    BandwidthRule bandwidth_rule;
    TauRule tau_rule;
    GapRule gap_rule;
    uint64_t seed = 0;
};

}  // namespace pcreg
