#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace pcreg {

// Piecewise-constant coefficient vector together with its induced structure.
// Change points are 1-based left endpoints of jumps: i in S means
// values[i] != values[i+1] in 1-based indexing, S subset of {1..p-1}.
struct PiecewiseSignal {
    Eigen::VectorXd values;
    std::vector<int> change_points;   // ascending
    Eigen::VectorXd levels;           // one per segment, |S|+1 entries
    int min_spacing = 0;              // min gap between consecutive boundaries, incl. 0 and p
    std::optional<double> min_jump;   // smallest |level step|; empty when no change points
};

// {i : v_i != v_{i+1}}, exact comparison, ascending, 1-based.
std::vector<int> change_points(const Eigen::VectorXd& v);

// {i : |v_i - v_{i+1}| > tol}; tol = 0 reduces to change_points.
// Solver output should always pass through this with the default tolerance.
std::vector<int> change_points_tol(const Eigen::VectorXd& v, double tol);

inline constexpr double kSolverChangeTol = 1e-8;

// First-difference operator action: out_i = v_i - v_{i+1}, length p-1.
Eigen::VectorXd apply_D(const Eigen::VectorXd& v);

// ||Dv||_1; zero for constant or length-1 vectors.
double total_variation(const Eigen::VectorXd& v);

// Materializes a signal from 1-based jump positions and per-segment levels.
// Throws parameter_error when adjacent levels coincide or boundaries are
// out of range / not strictly increasing.
PiecewiseSignal make_signal(const std::vector<int>& boundaries,
                            const Eigen::VectorXd& levels, int p);

}  // namespace pcreg
