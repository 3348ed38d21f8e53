#include "pcreg/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pcreg/errors.hpp"
#include "pcreg/signal.hpp"

namespace pcreg {

std::vector<int> candidate_set(const std::vector<int>& raw, int b, int p) {
    if (b < 1) throw parameter_error("candidate_set: bandwidth must be >= 1");
    if (2 * b > p) throw parameter_error("candidate_set: need 2b <= p");
    std::set<int> cands = {b, p - b};
    for (int r : raw) {
        for (int i : {r, r - b, r + b}) {
            if (i >= b && i <= p - b) cands.insert(i);
        }
    }
    return {cands.begin(), cands.end()};
}

double mean_filter_stat(const Eigen::VectorXd& xhat, int i, int b) {
    const int p = static_cast<int>(xhat.size());
    if (i < b || i > p - b)
        throw parameter_error("mean_filter_stat: i must lie in [b, p-b]");
    // 1-based windows (i+1..i+b) and (i-b+1..i) are 0-based (i..i+b-1), (i-b..i-1).
    double right = 0.0, left = 0.0;
    for (int j = 0; j < b; ++j) {
        right += xhat[i + j];
        left += xhat[i - b + j];
    }
    return (right - left) / b;
}

std::vector<int> mean_filter(const Eigen::VectorXd& xhat, int b, double tau,
                             const std::vector<int>& raw) {
    const int p = static_cast<int>(xhat.size());
    std::vector<int> survivors;
    for (int i : candidate_set(raw, b, p)) {
        if (std::abs(mean_filter_stat(xhat, i, b)) >= tau) survivors.push_back(i);
    }
    return survivors;
}

std::vector<int> mean_filter(const Eigen::VectorXd& xhat, int b, double tau) {
    return mean_filter(xhat, b, tau, change_points_tol(xhat, kSolverChangeTol));
}

std::vector<int> time_filter(const std::vector<int>& s_i, int t) {
    if (t < 1) throw parameter_error("time_filter: gap must be >= 1");
    if (s_i.size() <= 1) return s_i;
    std::vector<int> out;
    size_t start = 0;
    for (size_t k = 1; k <= s_i.size(); ++k) {
        if (k == s_i.size() || s_i[k] - s_i[k - 1] > t) {
            const size_t len = k - start;
            out.push_back(s_i[start + (len - 1) / 2]);  // lower median
            start = k;
        }
    }
    return out;
}

ChangePointReport localise(const Eigen::VectorXd& xhat, const FilterConfig& cfg) {
    const int p = static_cast<int>(xhat.size());
    if (cfg.bandwidth < 1 || 2 * cfg.bandwidth > p)
        throw parameter_error("localise: bandwidth invalid for this p");
    if (cfg.tau <= 0) throw parameter_error("localise: tau must be > 0");
    ChangePointReport report;
    report.config = cfg;
    report.raw = change_points_tol(xhat, kSolverChangeTol);
    report.filtered = mean_filter(xhat, cfg.bandwidth, cfg.tau, report.raw);
    report.pruned = time_filter(report.filtered, cfg.gap);
    return report;
}

}  // namespace pcreg
