#include "pcreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "pcreg/errors.hpp"
#include "pcreg/signal.hpp"

namespace pcreg {

double one_sided(const std::vector<int>& m1, const std::vector<int>& m2, int p) {
    if (m1.empty() && m2.empty()) return 0.0;
    if (m1.empty() || m2.empty()) return static_cast<double>(p);
    double worst = 0.0;
    for (int b : m2) {
        // m1 is sorted: nearest element via binary search.
        const auto it = std::lower_bound(m1.begin(), m1.end(), b);
        int best = std::numeric_limits<int>::max();
        if (it != m1.end()) best = std::min(best, std::abs(*it - b));
        if (it != m1.begin()) best = std::min(best, std::abs(*(it - 1) - b));
        worst = std::max(worst, static_cast<double>(best));
    }
    return worst;
}

double hausdorff(const std::vector<int>& m1, const std::vector<int>& m2, int p) {
    return std::max(one_sided(m1, m2, p), one_sided(m2, m1, p));
}

EvalResult evaluate_at(const Eigen::VectorXd& xhat, const Eigen::VectorXd& xstar,
                       const std::vector<int>& est_set,
                       const std::vector<int>& true_set, int p,
                       const std::optional<TestData>& test) {
    if (xhat.size() != xstar.size())
        throw dimension_error("evaluate: coefficient vectors differ in length");
    EvalResult res;
    res.coef_sq_error = (xhat - xstar).squaredNorm();
    res.coef_sq_error_per_p = res.coef_sq_error / p;
    res.d_est_given_true = one_sided(est_set, true_set, p);
    res.d_true_given_est = one_sided(true_set, est_set, p);
    res.hausdorff_dist = std::max(res.d_est_given_true, res.d_true_given_est);
    res.count_error = static_cast<int>(
        std::abs(static_cast<long>(est_set.size()) - static_cast<long>(true_set.size())));
    if (test) {
        if (test->A.cols() != xhat.size() || test->A.rows() != test->y.size())
            throw dimension_error("evaluate: test data dims mismatch");
        res.pred_mse = (test->y - test->A * xhat).squaredNorm() /
                       static_cast<double>(test->y.size());
    }
    return res;
}

EvalResult evaluate(const Eigen::VectorXd& xhat, const Eigen::VectorXd& xstar,
                    const ChangePointReport& report,
                    const std::optional<TestData>& test) {
    return evaluate_at(xhat, xstar, report.pruned, change_points(xstar),
                       static_cast<int>(xstar.size()), test);
}

}  // namespace pcreg
