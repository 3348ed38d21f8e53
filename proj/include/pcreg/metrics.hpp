#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pcreg/postprocess.hpp"

namespace pcreg {

struct EvalResult {
    double coef_sq_error = 0.0;        // ||xhat - xstar||^2
    double coef_sq_error_per_p = 0.0;  // same, divided by p
    std::optional<double> pred_mse;    // test-set mean squared prediction error
    double d_est_given_true = 0.0;     // d(S_hat | S_true)
    double d_true_given_est = 0.0;     // d(S_true | S_hat)
    double hausdorff_dist = 0.0;
    int count_error = 0;               // | |S_hat| - |S_true| |
};

// d(M1 | M2) = max over m2 of the distance from m2 to M1.
// Empty-set convention: either side empty -> p; both empty -> 0.
double one_sided(const std::vector<int>& m1, const std::vector<int>& m2, int p);

double hausdorff(const std::vector<int>& m1, const std::vector<int>& m2, int p);

struct TestData {
    Eigen::MatrixXd A;
    Eigen::VectorXd y;
};

// Distances and count for an arbitrary estimated set (pipeline stages feed
// their own sets through this).
EvalResult evaluate_at(const Eigen::VectorXd& xhat, const Eigen::VectorXd& xstar,
                       const std::vector<int>& est_set,
                       const std::vector<int>& true_set, int p,
                       const std::optional<TestData>& test = std::nullopt);

// Standard evaluation: distances and count use the pruned stage of the
// report; the true set is extracted exactly from xstar.
EvalResult evaluate(const Eigen::VectorXd& xhat, const Eigen::VectorXd& xstar,
                    const ChangePointReport& report,
                    const std::optional<TestData>& test = std::nullopt);

}  // namespace pcreg
