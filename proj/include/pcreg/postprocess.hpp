#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pcreg {

struct FilterConfig {
    int bandwidth = 1;   // b, window length either side
    double tau = 0.0;    // mean-filter threshold
    int gap = 1;         // t, time-filter clustering gap
};

struct ChangePointReport {
    std::vector<int> raw;       // S(x) from the fitted vector
    std::vector<int> filtered;  // S_I, mean-filter survivors
    std::vector<int> pruned;    // S_T, time-filter medians
    FilterConfig config;
};

// I_F = {i in [b, p-b] : i in raw or i-b in raw or i+b in raw} + {b, p-b}.
std::vector<int> candidate_set(const std::vector<int>& raw, int b, int p);

// F_i = mean(x[i+1..i+b]) - mean(x[i-b+1..i]), 1-based i in [b, p-b].
double mean_filter_stat(const Eigen::VectorXd& xhat, int i, int b);

// S_I = {i in I_F : |F_i| >= tau}, candidates from the given raw set.
std::vector<int> mean_filter(const Eigen::VectorXd& xhat, int b, double tau,
                             const std::vector<int>& raw);

// Convenience overload: raw = change_points_tol(xhat, default tol).
std::vector<int> mean_filter(const Eigen::VectorXd& xhat, int b, double tau);

// Splits after gaps strictly greater than t, keeps each group's lower median.
std::vector<int> time_filter(const std::vector<int>& s_i, int t);

// Full pipeline: raw (tolerance extraction), mean filter, time filter.
ChangePointReport localise(const Eigen::VectorXd& xhat, const FilterConfig& cfg);

}  // namespace pcreg
