#include "pcreg/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcreg/errors.hpp"

namespace pcreg {

std::vector<int> change_points(const Eigen::VectorXd& v) {
    return change_points_tol(v, 0.0);
}

std::vector<int> change_points_tol(const Eigen::VectorXd& v, double tol) {
    if (tol < 0) throw parameter_error("change_points_tol: tol must be >= 0");
    std::vector<int> out;
    for (int i = 0; i + 1 < v.size(); ++i) {
        const double diff = std::abs(v[i] - v[i + 1]);
        if (tol == 0.0 ? v[i] != v[i + 1] : diff > tol) out.push_back(i + 1);
    }
    return out;
}

Eigen::VectorXd apply_D(const Eigen::VectorXd& v) {
    if (v.size() < 2) throw dimension_error("apply_D: vector must have length >= 2");
    Eigen::VectorXd out(v.size() - 1);
    for (int i = 0; i + 1 < v.size(); ++i) out[i] = v[i] - v[i + 1];
    return out;
}

double total_variation(const Eigen::VectorXd& v) {
    double tv = 0.0;
    for (int i = 0; i + 1 < v.size(); ++i) tv += std::abs(v[i] - v[i + 1]);
    return tv;
}

PiecewiseSignal make_signal(const std::vector<int>& boundaries,
                            const Eigen::VectorXd& levels, int p) {
    if (p < 1) throw parameter_error("make_signal: p must be >= 1");
    if (levels.size() != static_cast<long>(boundaries.size()) + 1)
        throw parameter_error("make_signal: need |levels| = |boundaries| + 1");
    int prev = 0;
    for (int b : boundaries) {
        if (b < 1 || b > p - 1)
            throw parameter_error("make_signal: boundary " + std::to_string(b) +
                                  " outside {1.." + std::to_string(p - 1) + "}");
        if (b <= prev)
            throw parameter_error("make_signal: boundaries must be strictly increasing");
        prev = b;
    }
    for (int s = 0; s + 1 < levels.size(); ++s) {
        if (levels[s] == levels[s + 1])
            throw parameter_error(
                "make_signal: adjacent levels equal at segment " + std::to_string(s + 1) +
                "; the declared boundary is not a jump");
    }

    PiecewiseSignal sig;
    sig.change_points = boundaries;
    sig.levels = levels;
    sig.values.resize(p);
    int seg = 0;
    for (int i = 0; i < p; ++i) {
        // boundaries are 1-based left endpoints: i+1 > boundary means next segment
        while (seg < static_cast<int>(boundaries.size()) && i + 1 > boundaries[static_cast<size_t>(seg)])
            ++seg;
        sig.values[i] = levels[seg];
    }

    int spacing = p;
    int last = 0;
    for (int b : boundaries) {
        spacing = std::min(spacing, b - last);
        last = b;
    }
    spacing = std::min(spacing, p - last);
    sig.min_spacing = spacing;

    if (!boundaries.empty()) {
        double jump = std::numeric_limits<double>::infinity();
        for (int s = 0; s + 1 < levels.size(); ++s)
            jump = std::min(jump, std::abs(levels[s] - levels[s + 1]));
        sig.min_jump = jump;
    }
    return sig;
}

}  // namespace pcreg
