#include "pcreg/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcreg/errors.hpp"
#include "pcreg/rng.hpp"
#include "pcreg/signal.hpp"

namespace pcreg {

int default_bandwidth(int p) {
    if (p < 2) throw parameter_error("default_bandwidth: p too small");
    const double ln = std::log(static_cast<double>(p));
    int b = static_cast<int>(std::floor(0.25 * ln * ln));
    if (b < 1)
        throw parameter_error("default_bandwidth: p too small for the bandwidth rule (need p >= 8)");
    b = std::min(b, (p - 1) / 2);
    return b;
}

int default_gap(int p) { return 2 * default_bandwidth(p); }

int BandwidthRule::resolve(int p) const {
    return log_rule ? default_bandwidth(p) : fixed_b;
}

int GapRule::resolve(int b) const { return twice_bandwidth ? 2 * b : fixed_t; }

TauResult TauRule::resolve(const Eigen::VectorXd& xhat, int b, uint64_t seed) const {
    switch (kind) {
        case Kind::Permutation: return permutation_tau(xhat, b, B, alpha, seed);
        case Kind::PermutationPooled: return permutation_tau_pooled(xhat, b, B, alpha, seed);
        case Kind::Fixed: return {fixed_tau, false};
    }
    return {fixed_tau, false};
}

namespace {

// Contiguous chunks of a seeded random permutation; sizes differ by <= 1.
std::vector<std::vector<int>> make_folds(int n, int K, uint64_t seed) {
    Rng rng(seed);
    const std::vector<int> perm = rng.permutation(n);
    std::vector<std::vector<int>> folds(static_cast<size_t>(K));
    const int base = n / K;
    const int extra = n % K;
    int pos = 0;
    for (int f = 0; f < K; ++f) {
        const int len = base + (f < extra ? 1 : 0);
        folds[static_cast<size_t>(f)].assign(perm.begin() + pos, perm.begin() + pos + len);
        std::sort(folds[static_cast<size_t>(f)].begin(), folds[static_cast<size_t>(f)].end());
        pos += len;
    }
    return folds;
}

// Identity-design held-out prediction: a fit trained on a subset of
// coordinates extends optimally to the rest by any value between the two
// neighbouring fitted values (the TV of the completion telescopes across
// the gap); the midpoint is the canonical choice, the nearest fitted value
// at the boundary.
double predict_identity(const std::vector<int>& train, const Eigen::VectorXd& xt, int i) {
    const auto it = std::upper_bound(train.begin(), train.end(), i);
    if (it == train.begin()) return xt[0];
    if (it == train.end()) return xt[xt.size() - 1];
    const long right = it - train.begin();
    return 0.5 * (xt[right - 1] + xt[right]);
}

}  // namespace

CvResult cross_validate(const DesignMatrix& A, const Eigen::VectorXd& y,
                        const std::vector<double>& grid, int K,
                        EstimatorKind kind, uint64_t seed,
                        const SolverConfig& cfg) {
    const int n = A.n();
    if (K < 2 || K > n) throw parameter_error("cross_validate: need 2 <= K <= n");
    if (grid.empty()) throw parameter_error("cross_validate: empty lambda grid");
    for (double g : grid)
        if (g <= 0) throw parameter_error("cross_validate: grid values must be > 0");
    if (A.n() != y.size()) throw dimension_error("cross_validate: dims mismatch");

    // Process descending for warm starts; report the curve in input order.
    std::vector<size_t> order(grid.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return grid[a] > grid[b]; });

    double ratio = 0.0;
    if (kind == EstimatorKind::SparseFL) {
        double rho_hat = 0.0;
        for (int j = 0; j < A.p(); ++j)
            rho_hat = std::max(rho_hat, A.data.col(j).squaredNorm() / n);
        ratio = std::sqrt(rho_hat);
    }

    const auto folds = make_folds(n, K, seed);
    std::vector<double> curve(grid.size(), 0.0);

    const bool identity_fast =
        (A.family == DesignFamily::Identity && kind == EstimatorKind::FL);

    for (const auto& fold : folds) {
        if (fold.empty()) throw parameter_error("cross_validate: empty fold");
        std::vector<char> held(static_cast<size_t>(n), 0);
        for (int i : fold) held[static_cast<size_t>(i)] = 1;
        std::vector<int> train;
        train.reserve(static_cast<size_t>(n) - fold.size());
        for (int i = 0; i < n; ++i)
            if (!held[static_cast<size_t>(i)]) train.push_back(i);

        if (identity_fast) {
            Eigen::VectorXd yt(static_cast<long>(train.size()));
            for (size_t k = 0; k < train.size(); ++k) yt[static_cast<long>(k)] = y[train[k]];
            for (size_t oi : order) {
                const Eigen::VectorXd xt = prox_tv_1d(yt, grid[oi]);
                double sse = 0.0;
                for (int i : fold) {
                    const double pred = predict_identity(train, xt, i);
                    sse += (y[i] - pred) * (y[i] - pred);
                }
                curve[oi] += sse / static_cast<double>(fold.size());
            }
        } else {
            Eigen::MatrixXd At(static_cast<long>(train.size()), A.p());
            Eigen::VectorXd yt(static_cast<long>(train.size()));
            for (size_t k = 0; k < train.size(); ++k) {
                At.row(static_cast<long>(k)) = A.data.row(train[k]);
                yt[static_cast<long>(k)] = y[train[k]];
            }
            FusedLassoWorkspace ws(At, yt);
            for (size_t oi : order) {
                const double l2 = grid[oi];
                const double l1 = kind == EstimatorKind::SparseFL ? ratio * l2 : 0.0;
                const EstimatorFit fit = ws.solve(l1, l2, cfg);
                double sse = 0.0;
                for (int i : fold) {
                    const double pred = A.data.row(i).dot(fit.coefficients);
                    sse += (y[i] - pred) * (y[i] - pred);
                }
                curve[oi] += sse / static_cast<double>(fold.size());
            }
        }
    }
    for (auto& v : curve) v /= K;

    // Ties resolve to the larger lambda: scan in descending order, strict <.
    size_t best = order[0];
    for (size_t oi : order)
        if (curve[oi] < curve[best]) best = oi;

    CvResult res;
    res.grid = grid;
    res.curve = curve;
    res.lambda2 = grid[best];
    res.lambda1 = kind == EstimatorKind::SparseFL ? ratio * grid[best] : 0.0;
    res.lambda1_over_lambda2 = ratio;
    return res;
}

namespace {

// |F_i| over i in [b, p-b] for a (possibly permuted) vector, via prefix sums.
void filter_stats_abs(const Eigen::VectorXd& v, int b, std::vector<double>& out) {
    const int p = static_cast<int>(v.size());
    std::vector<double> prefix(static_cast<size_t>(p) + 1, 0.0);
    for (int i = 0; i < p; ++i) prefix[static_cast<size_t>(i) + 1] = prefix[static_cast<size_t>(i)] + v[i];
    out.clear();
    for (int i = b; i <= p - b; ++i) {
        const double right = prefix[static_cast<size_t>(i + b)] - prefix[static_cast<size_t>(i)];
        const double left = prefix[static_cast<size_t>(i)] - prefix[static_cast<size_t>(i - b)];
        out.push_back(std::abs((right - left) / b));
    }
}

struct PermSetup {
    bool degenerate;
    Eigen::VectorXd values;
};

PermSetup check_perm_inputs(const Eigen::VectorXd& xhat, int b, int B, double alpha) {
    const int p = static_cast<int>(xhat.size());
    if (B < 1) throw parameter_error("permutation tau: B must be >= 1");
    if (alpha <= 0 || alpha >= 1) throw parameter_error("permutation tau: need 0 < alpha < 1");
    if (b < 1 || 2 * b > p) throw parameter_error("permutation tau: bandwidth invalid for p");
    bool constant = true;
    for (int i = 1; i < p; ++i)
        if (xhat[i] != xhat[0]) { constant = false; break; }
    return {constant, xhat};
}

}  // namespace

TauResult permutation_tau(const Eigen::VectorXd& xhat, int b, int B,
                          double alpha, uint64_t seed) {
    const auto setup = check_perm_inputs(xhat, b, B, alpha);
    if (setup.degenerate) return {0.0, true};
    const int p = static_cast<int>(xhat.size());
    Rng rng(seed);
    std::vector<double> maxima(static_cast<size_t>(B));
    std::vector<double> stats;
    Eigen::VectorXd permuted(p);
    for (int k = 0; k < B; ++k) {
        const std::vector<int> perm = rng.permutation(p);
        for (int i = 0; i < p; ++i) permuted[i] = xhat[perm[static_cast<size_t>(i)]];
        filter_stats_abs(permuted, b, stats);
        maxima[static_cast<size_t>(k)] = *std::max_element(stats.begin(), stats.end());
    }
    std::sort(maxima.begin(), maxima.end());
    // Lowest value whose empirical CDF reaches 1 - alpha.
    auto rank = static_cast<size_t>(std::ceil((1.0 - alpha) * B));
    rank = std::clamp<size_t>(rank, 1, static_cast<size_t>(B));
    return {maxima[rank - 1], false};
}

TauResult permutation_tau_pooled(const Eigen::VectorXd& xhat, int b, int B,
                                 double alpha, uint64_t seed) {
    const auto setup = check_perm_inputs(xhat, b, B, alpha);
    if (setup.degenerate) return {0.0, true};
    const int p = static_cast<int>(xhat.size());
    Rng rng(seed);
    std::vector<double> pool;
    pool.reserve(static_cast<size_t>(B) * static_cast<size_t>(p - 2 * b + 1));
    std::vector<double> stats;
    Eigen::VectorXd permuted(p);
    for (int k = 0; k < B; ++k) {
        const std::vector<int> perm = rng.permutation(p);
        for (int i = 0; i < p; ++i) permuted[i] = xhat[perm[static_cast<size_t>(i)]];
        filter_stats_abs(permuted, b, stats);
        pool.insert(pool.end(), stats.begin(), stats.end());
    }
    auto rank = static_cast<size_t>(std::ceil((1.0 - alpha) * static_cast<double>(pool.size())));
    rank = std::clamp<size_t>(rank, 1, pool.size());
    std::nth_element(pool.begin(), pool.begin() + static_cast<long>(rank - 1), pool.end());
    return {pool[rank - 1], false};
}

}  // namespace pcreg
