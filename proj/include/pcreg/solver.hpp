#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pcreg/design.hpp"
#include "pcreg/errors.hpp"

namespace pcreg {

struct SolverConfig {
    int max_iters = 5000;
    double abs_tol = 1e-7;
    double rel_tol = 1e-5;
    double admm_rho = 1.0;
    std::optional<Eigen::VectorXd> warm_start;
};

struct EstimatorFit {
    Eigen::VectorXd coefficients;
    double objective = 0.0;     // recomputed from coefficients
    int iterations = 0;
    bool converged = true;
    double achieved_tv = 0.0;   // ||D x||_1
    double achieved_l1 = 0.0;   // ||x||_1
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

// Exact minimiser of ||y - x||^2 + lam ||Dx||_1 by the dynamic-programming
// taut-string recursion; machine precision, O(n) amortized.
Eigen::VectorXd prox_tv_1d(const Eigen::VectorXd& y, double lam);

// min ||y - Ax||^2 + lambda2 ||Dx||_1. Identity designs dispatch to
// prox_tv_1d; everything else runs ADMM on the stacked penalty operator.
EstimatorFit fused_lasso(const DesignMatrix& A, const Eigen::VectorXd& y,
                         double lambda2, const SolverConfig& cfg = {});

// min ||y - Ax||^2 + lambda1 ||x||_1 + lambda2 ||Dx||_1.
EstimatorFit sparse_fused_lasso(const DesignMatrix& A, const Eigen::VectorXd& y,
                                double lambda1, double lambda2,
                                const SolverConfig& cfg = {});

// Bisection trace point for constrained-solve diagnostics.
struct BracketPoint {
    double lambda2;
    double achieved_tv;
};

class bisection_error : public numeric_error {
public:
    bisection_error(const std::string& what, std::vector<BracketPoint> trace)
        : numeric_error(what), trace(std::move(trace)) {}
    std::vector<BracketPoint> trace;
};

// min ||y - Ax||^2 subject to ||Dx||_1 <= V, via bisection over lambda2.
// Guarantees achieved_tv <= V + tv_tol with tv_tol = 1e-4 * max(1, V).
EstimatorFit constrained_fused_lasso(const DesignMatrix& A, const Eigen::VectorXd& y,
                                     double V, const SolverConfig& cfg = {});

// Subgradient optimality residual ||2 A^T (A x - y) + l1 g1 + l2 D^T g2||_inf
// minimised greedily over valid subgradients g1, g2 (constructed explicitly).
double kkt_residual(const DesignMatrix& A, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& x, double lambda1, double lambda2);

// Smallest power-of-two multiple of an initial guess whose fit is constant;
// doubling search, warm-started. Used as the top of cross-validation grids.
double lambda_max_search(const DesignMatrix& A, const Eigen::VectorXd& y,
                         const SolverConfig& cfg = {});

// size log-spaced values from lambda_max down to lambda_max * 10^{-decades}.
std::vector<double> lambda_grid(double lambda_max, int size = 50, double decades = 4.0);

// Reusable ADMM engine: caches 2 A^T A, 2 A^T y and the Cholesky factor of
// (2 A^T A + rho (I + D^T D)); warm-startable across a lambda grid.
class FusedLassoWorkspace {
public:
    FusedLassoWorkspace(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

    // lambda1 = 0 gives the plain fused lasso. Successive calls reuse the
    // previous solution and scaled duals as the warm start.
    EstimatorFit solve(double lambda1, double lambda2, const SolverConfig& cfg);

    void reset_warm_start();

private:
    void factorize(double rho);

    Eigen::MatrixXd AtA2_;
    Eigen::VectorXd Aty2_;
    Eigen::VectorXd y_;
    double yty_ = 0.0;
    int n_ = 0;
    int p_ = 0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double factor_rho_ = -1.0;

    bool have_warm_ = false;
    Eigen::VectorXd wx_, wz1_, wz2_, wu1_, wu2_;
    double wrho_ = 0.0;
};

}  // namespace pcreg
