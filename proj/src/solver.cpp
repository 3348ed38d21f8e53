#include "pcreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pcreg/signal.hpp"

namespace pcreg {

namespace {

// Dynamic-programming exact solution of min_x 1/2 ||y - x||^2 + lam ||Dx||_1.
// Knot representation of the piecewise-quadratic value function; each forward
// step clips it to [-lam, lam] in derivative, the backward pass follows the
// stored clip boundaries tm/tp. Amortized O(n): every knot enters and leaves
// the active window once.
void tvd_half(const double* y, int n, double lam, double* theta) {
    if (n == 0) return;
    if (n == 1 || lam == 0) {
        std::copy(y, y + n, theta);
        return;
    }

    std::vector<double> x(2 * static_cast<size_t>(n));
    std::vector<double> a(2 * static_cast<size_t>(n));
    std::vector<double> b(2 * static_cast<size_t>(n));
    std::vector<double> tm(static_cast<size_t>(n) - 1);
    std::vector<double> tp(static_cast<size_t>(n) - 1);

    tm[0] = -lam + y[0];
    tp[0] = lam + y[0];
    int l = n - 1;
    int r = n;
    x[l] = tm[0];
    x[r] = tp[0];
    a[l] = 1;
    b[l] = -y[0] + lam;
    a[r] = -1;
    b[r] = y[0] + lam;
    double afirst = 1;
    double bfirst = -y[1] - lam;
    double alast = -1;
    double blast = y[1] - lam;

    for (int k = 1; k < n - 1; ++k) {
        // Walk up from the left until the derivative exceeds -lam.
        double alo = afirst;
        double blo = bfirst;
        int lo = l;
        for (; lo <= r; ++lo) {
            if (alo * x[lo] + blo > -lam) break;
            alo += a[lo];
            blo += b[lo];
        }

        // Walk down from the right until the derivative falls below lam.
        double ahi = alast;
        double bhi = blast;
        int hi = r;
        for (; hi >= lo; --hi) {
            if (-ahi * x[hi] - bhi < lam) break;
            ahi += a[hi];
            bhi += b[hi];
        }

        tm[k] = (-lam - blo) / alo;
        l = lo - 1;
        x[l] = tm[k];

        tp[k] = (lam + bhi) / (-ahi);
        r = hi + 1;
        x[r] = tp[k];

        a[l] = alo;
        b[l] = blo + lam;
        a[r] = ahi;
        b[r] = bhi + lam;
        afirst = 1;
        bfirst = -y[k + 1] - lam;
        alast = -1;
        blast = y[k + 1] - lam;
    }

    // Last coefficient: zero of the final derivative.
    double alo = afirst;
    double blo = bfirst;
    int lo = l;
    for (; lo <= r; ++lo) {
        if (alo * x[lo] + blo > 0) break;
        alo += a[lo];
        blo += b[lo];
    }
    theta[n - 1] = -blo / alo;

    for (int k = n - 2; k >= 0; --k) {
        if (theta[k + 1] > tp[k]) theta[k] = tp[k];
        else if (theta[k + 1] < tm[k]) theta[k] = tm[k];
        else theta[k] = theta[k + 1];
    }
}

double soft(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

// (D^T w)_j = w_j - w_{j-1} with w_{-1} = w_{p-1} = 0.
Eigen::VectorXd apply_Dt(const Eigen::VectorXd& w, int p) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < p - 1; ++j) {
        out[j] += w[j];
        out[j + 1] -= w[j];
    }
    return out;
}

Eigen::VectorXd forward_diff(const Eigen::VectorXd& x) {
    Eigen::VectorXd out(x.size() - 1);
    for (int i = 0; i + 1 < x.size(); ++i) out[i] = x[i] - x[i + 1];
    return out;
}

}  // namespace

Eigen::VectorXd prox_tv_1d(const Eigen::VectorXd& y, double lam) {
    if (lam < 0) throw parameter_error("prox_tv_1d: lam must be >= 0");
    Eigen::VectorXd theta(y.size());
    // ||y - x||^2 + lam ||Dx||_1 = 2 (1/2 ||y - x||^2 + (lam/2) ||Dx||_1)
    tvd_half(y.data(), static_cast<int>(y.size()), lam / 2.0, theta.data());
    return theta;
}

FusedLassoWorkspace::FusedLassoWorkspace(const Eigen::MatrixXd& A,
                                         const Eigen::VectorXd& y) {
    if (A.rows() != y.size())
        throw dimension_error("fused lasso: A has " + std::to_string(A.rows()) +
                              " rows but y has length " + std::to_string(y.size()));
    n_ = static_cast<int>(A.rows());
    p_ = static_cast<int>(A.cols());
    AtA2_ = 2.0 * (A.transpose() * A);
    Aty2_ = 2.0 * (A.transpose() * y);
    y_ = y;
    yty_ = y.squaredNorm();
}

void FusedLassoWorkspace::reset_warm_start() { have_warm_ = false; }

void FusedLassoWorkspace::factorize(double rho) {
    Eigen::MatrixXd H = AtA2_;
    // I + D^T D: tridiagonal with diagonal (2, 3, ..., 3, 2) and -1 off it.
    H.diagonal().array() += 3.0 * rho;
    H(0, 0) -= rho;
    H(p_ - 1, p_ - 1) -= rho;
    for (int i = 0; i + 1 < p_; ++i) {
        H(i, i + 1) -= rho;
        H(i + 1, i) -= rho;
    }
    llt_.compute(H);
    if (llt_.info() != Eigen::Success)
        throw numeric_error("fused lasso: Cholesky factorisation failed");
    factor_rho_ = rho;
}

EstimatorFit FusedLassoWorkspace::solve(double lambda1, double lambda2,
                                        const SolverConfig& cfg) {
    if (lambda1 < 0 || lambda2 < 0)
        throw parameter_error("fused lasso: penalties must be >= 0");
    if (cfg.max_iters < 1 || cfg.abs_tol <= 0 || cfg.rel_tol <= 0 || cfg.admm_rho <= 0)
        throw parameter_error("fused lasso: invalid solver configuration");

    const int p = p_;
    const int m = 2 * p - 1;  // stacked constraint rows: z1 (p) + z2 (p-1)

    Eigen::VectorXd xv, z1, z2, u1, u2;
    double rho;
    if (cfg.warm_start) {
        if (cfg.warm_start->size() != p)
            throw dimension_error("fused lasso: warm start has wrong length");
        xv = *cfg.warm_start;
        z1 = xv;
        z2 = p > 1 ? forward_diff(xv) : Eigen::VectorXd(0);
        u1 = Eigen::VectorXd::Zero(p);
        u2 = Eigen::VectorXd::Zero(std::max(0, p - 1));
        rho = cfg.admm_rho;
    } else if (have_warm_) {
        xv = wx_; z1 = wz1_; z2 = wz2_; u1 = wu1_; u2 = wu2_;
        rho = wrho_;
    } else {
        xv = Eigen::VectorXd::Zero(p);
        z1 = xv;
        z2 = Eigen::VectorXd::Zero(std::max(0, p - 1));
        u1 = Eigen::VectorXd::Zero(p);
        u2 = Eigen::VectorXd::Zero(std::max(0, p - 1));
        rho = cfg.admm_rho;
    }

    const double sqrt_m = std::sqrt(static_cast<double>(m));
    const double sqrt_p = std::sqrt(static_cast<double>(p));
    bool converged = false;
    int it = 0;

    for (it = 1; it <= cfg.max_iters; ++it) {
        if (rho != factor_rho_) factorize(rho);

        Eigen::VectorXd rhs = Aty2_ + rho * (z1 - u1);
        if (p > 1) rhs += rho * apply_Dt(z2 - u2, p);
        xv = llt_.solve(rhs);
        const Eigen::VectorXd dx = p > 1 ? forward_diff(xv) : Eigen::VectorXd(0);

        const Eigen::VectorXd z1_old = z1;
        const Eigen::VectorXd z2_old = z2;
        if (lambda1 > 0) {
            const double t1 = lambda1 / rho;
            for (int i = 0; i < p; ++i) z1[i] = soft(xv[i] + u1[i], t1);
        } else {
            z1 = xv + u1;
        }
        if (p > 1) {
            if (lambda2 > 0) {
                const double t2 = lambda2 / rho;
                for (int i = 0; i < p - 1; ++i) z2[i] = soft(dx[i] + u2[i], t2);
            } else {
                z2 = dx + u2;
            }
        }
        u1 += xv - z1;
        if (p > 1) u2 += dx - z2;

        const double r_norm = std::sqrt((xv - z1).squaredNorm() + (dx - z2).squaredNorm());
        Eigen::VectorXd dtz = z1 - z1_old;
        if (p > 1) dtz += apply_Dt(z2 - z2_old, p);
        const double s_norm = rho * dtz.norm();

        const double mx_norm = std::sqrt(xv.squaredNorm() + dx.squaredNorm());
        const double z_norm = std::sqrt(z1.squaredNorm() + z2.squaredNorm());
        Eigen::VectorXd dual = u1;
        if (p > 1) dual += apply_Dt(u2, p);
        const double eps_pri = sqrt_m * cfg.abs_tol + cfg.rel_tol * std::max(mx_norm, z_norm);
        const double eps_dual = sqrt_p * cfg.abs_tol + cfg.rel_tol * rho * dual.norm();

        if (r_norm <= eps_pri && s_norm <= eps_dual) {
            converged = true;
            break;
        }

        // Residual balancing; frozen after 1000 iterations so the iteration
        // becomes a fixed-point map and cannot oscillate between scales.
        if (it % 25 == 0 && it < 1000) {
            if (r_norm > 10.0 * s_norm && rho < 1e8) {
                rho *= 2.0;
                u1 /= 2.0;
                u2 /= 2.0;
            } else if (s_norm > 10.0 * r_norm && rho > 1e-6) {
                rho /= 2.0;
                u1 *= 2.0;
                u2 *= 2.0;
            }
        }
    }
    if (it > cfg.max_iters) it = cfg.max_iters;

    wx_ = xv; wz1_ = z1; wz2_ = z2; wu1_ = u1; wu2_ = u2; wrho_ = rho;
    have_warm_ = true;

    auto objective_of = [&](const Eigen::VectorXd& v) {
        double f = yty_ - Aty2_.dot(v) + 0.5 * v.dot(AtA2_ * v);
        f += lambda1 * v.lpNorm<1>();
        f += lambda2 * total_variation(v);
        return f;
    };

    // Snap to exactly piecewise-constant using the z-support: z2's exact
    // zeros mark within-segment positions, z1's exact zeros mark segments
    // pinned to 0. Kept only when the objective does not get worse.
    Eigen::VectorXd chosen = xv;
    const double raw_obj = objective_of(xv);
    if (lambda2 > 0 && p > 1) {
        Eigen::VectorXd snapped(p);
        int start = 0;
        for (int i = 0; i <= p - 1; ++i) {
            const bool boundary = (i == p - 1) || (z2[i] != 0.0);
            if (!boundary) continue;
            const int len = i - start + 1;
            double value = xv.segment(start, len).mean();
            if (lambda1 > 0) {
                bool all_zero = true;
                for (int j = start; j <= i; ++j)
                    if (z1[j] != 0.0) { all_zero = false; break; }
                if (all_zero) value = 0.0;
            }
            snapped.segment(start, len).setConstant(value);
            start = i + 1;
        }
        const double snap_obj = objective_of(snapped);
        if (snap_obj <= raw_obj + cfg.rel_tol * (1.0 + std::abs(raw_obj)))
            chosen = snapped;
    } else if (lambda1 > 0) {
        Eigen::VectorXd snapped = xv;
        for (int i = 0; i < p; ++i)
            if (z1[i] == 0.0) snapped[i] = 0.0;
        const double snap_obj = objective_of(snapped);
        if (snap_obj <= raw_obj + cfg.rel_tol * (1.0 + std::abs(raw_obj)))
            chosen = snapped;
    }

    EstimatorFit fit;
    fit.coefficients = chosen;
    fit.objective = objective_of(chosen);
    fit.iterations = it;
    fit.converged = converged;
    fit.achieved_tv = total_variation(chosen);
    fit.achieved_l1 = chosen.lpNorm<1>();
    fit.lambda1 = lambda1;
    fit.lambda2 = lambda2;
    return fit;
}

namespace {

EstimatorFit exact_identity_fit(const Eigen::VectorXd& y, double lambda1,
                                double lambda2) {
    Eigen::VectorXd x = prox_tv_1d(y, lambda2);
    if (lambda1 > 0) {
        // Soft-thresholding the TV prox solves the doubly-penalised identity
        // problem exactly (the thresholding commutes with the fusion step).
        for (int i = 0; i < x.size(); ++i) x[i] = soft(x[i], lambda1 / 2.0);
    }
    EstimatorFit fit;
    fit.coefficients = x;
    fit.objective = (y - x).squaredNorm() + lambda1 * x.lpNorm<1>() +
                    lambda2 * total_variation(x);
    fit.iterations = 0;
    fit.converged = true;
    fit.achieved_tv = total_variation(x);
    fit.achieved_l1 = x.lpNorm<1>();
    fit.lambda1 = lambda1;
    fit.lambda2 = lambda2;
    return fit;
}

}  // namespace

EstimatorFit fused_lasso(const DesignMatrix& A, const Eigen::VectorXd& y,
                         double lambda2, const SolverConfig& cfg) {
    if (A.family == DesignFamily::Identity) {
        if (A.p() != y.size())
            throw dimension_error("fused_lasso: identity design needs n = p = len(y)");
        return exact_identity_fit(y, 0.0, lambda2);
    }
    FusedLassoWorkspace ws(A.data, y);
    return ws.solve(0.0, lambda2, cfg);
}

EstimatorFit sparse_fused_lasso(const DesignMatrix& A, const Eigen::VectorXd& y,
                                double lambda1, double lambda2,
                                const SolverConfig& cfg) {
    if (A.family == DesignFamily::Identity) {
        if (A.p() != y.size())
            throw dimension_error("sparse_fused_lasso: identity design needs n = p = len(y)");
        return exact_identity_fit(y, lambda1, lambda2);
    }
    FusedLassoWorkspace ws(A.data, y);
    return ws.solve(lambda1, lambda2, cfg);
}

namespace {

EstimatorFit solve_any(const DesignMatrix& A, const Eigen::VectorXd& y,
                       FusedLassoWorkspace* ws, double lambda2,
                       const SolverConfig& cfg) {
    if (A.family == DesignFamily::Identity) return exact_identity_fit(y, 0.0, lambda2);
    return ws->solve(0.0, lambda2, cfg);
}

}  // namespace

EstimatorFit constrained_fused_lasso(const DesignMatrix& A, const Eigen::VectorXd& y,
                                     double V, const SolverConfig& cfg) {
    if (V < 0) throw parameter_error("constrained_fused_lasso: V must be >= 0");
    const double tv_tol = 1e-4 * std::max(1.0, V);

    std::optional<FusedLassoWorkspace> ws;
    if (A.family != DesignFamily::Identity) ws.emplace(A.data, y);
    std::vector<BracketPoint> trace;

    EstimatorFit lo_fit = solve_any(A, y, ws ? &*ws : nullptr, 0.0, cfg);
    trace.push_back({0.0, lo_fit.achieved_tv});
    if (lo_fit.achieved_tv <= V + tv_tol) return lo_fit;  // constraint inactive

    // Doubling search for a high bracket whose TV is at or below the budget.
    double lo = 0.0;
    double tv_lo = lo_fit.achieved_tv;
    double hi = 1.0;
    EstimatorFit hi_fit = solve_any(A, y, ws ? &*ws : nullptr, hi, cfg);
    trace.push_back({hi, hi_fit.achieved_tv});
    int guard = 0;
    while (hi_fit.achieved_tv > V + tv_tol) {
        lo = hi;
        tv_lo = hi_fit.achieved_tv;
        hi *= 2.0;
        hi_fit = solve_any(A, y, ws ? &*ws : nullptr, hi, cfg);
        trace.push_back({hi, hi_fit.achieved_tv});
        if (++guard > 200)
            throw bisection_error("constrained_fused_lasso: no finite lambda2 reaches the TV budget",
                                  trace);
    }
    if (std::abs(hi_fit.achieved_tv - V) <= tv_tol) return hi_fit;

    // Invariant: tv(lo) >= V >= tv(hi). Non-monotone probes mean the
    // penalised path is too noisy to bridge; surface the trace.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        EstimatorFit mid_fit = solve_any(A, y, ws ? &*ws : nullptr, mid, cfg);
        trace.push_back({mid, mid_fit.achieved_tv});
        if (mid_fit.achieved_tv > tv_lo + tv_tol ||
            mid_fit.achieved_tv < hi_fit.achieved_tv - tv_tol)
            throw bisection_error(
                "constrained_fused_lasso: achieved TV is not monotone in lambda2", trace);
        if (std::abs(mid_fit.achieved_tv - V) <= tv_tol) return mid_fit;
        if (mid_fit.achieved_tv > V) {
            lo = mid;
            tv_lo = mid_fit.achieved_tv;
        } else {
            hi = mid;
            hi_fit = mid_fit;
        }
        if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
    }
    // The interval collapsed with TV still jumping across the budget:
    // return the feasible side if it is within tolerance-sized reach.
    if (hi_fit.achieved_tv <= V + tv_tol) return hi_fit;
    throw bisection_error("constrained_fused_lasso: bracket collapsed without meeting the budget",
                          trace);
}

double kkt_residual(const DesignMatrix& A, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& x, double lambda1, double lambda2) {
    const int p = static_cast<int>(x.size());
    const Eigen::VectorXd r = 2.0 * (A.data.transpose() * (A.data * x - y));
    const double tie_tol = 1e-9 * (1.0 + x.cwiseAbs().maxCoeff());

    if (lambda2 == 0.0) {
        double worst = 0.0;
        for (int i = 0; i < p; ++i) {
            double g1 = 0.0;
            if (lambda1 > 0) {
                g1 = std::abs(x[i]) > tie_tol ? (x[i] > 0 ? 1.0 : -1.0)
                                              : std::clamp(-r[i] / lambda1, -1.0, 1.0);
            }
            worst = std::max(worst, std::abs(r[i] + lambda1 * g1));
        }
        return worst;
    }

    // Partial sums S_i = sum_{j<=i} (r_j + l1 g1_j) + l2 g2_i telescope the
    // stationarity condition; each component equals S_i - S_{i-1}. Greedy
    // choice: free g1 drives the running sum toward the g2-achievable set,
    // free g2 then clips it. Jump positions fix g2 at the jump sign.
    double C = 0.0;       // running sum of r + l1 g1
    double S_prev = 0.0;  // S_0 = 0
    double worst = 0.0;
    for (int i = 0; i < p; ++i) {
        const bool last = (i == p - 1);
        const bool jump = !last && std::abs(x[i] - x[i + 1]) > tie_tol;
        double target_lo, target_hi;
        if (last) {
            target_lo = target_hi = 0.0;
        } else if (jump) {
            const double g2_fixed = x[i] > x[i + 1] ? 1.0 : -1.0;
            target_lo = target_hi = -lambda2 * g2_fixed;
        } else {
            target_lo = -lambda2;
            target_hi = lambda2;
        }

        double g1 = 0.0;
        if (lambda1 > 0) {
            if (std::abs(x[i]) > tie_tol) {
                g1 = x[i] > 0 ? 1.0 : -1.0;
            } else {
                const double want = std::clamp(C + r[i], target_lo, target_hi);
                g1 = std::clamp((want - C - r[i]) / lambda1, -1.0, 1.0);
            }
        }
        C += r[i] + lambda1 * g1;

        double S;
        if (last) {
            S = C;  // g2 has no p-th coordinate
        } else if (jump) {
            S = C - target_lo;  // S = C + l2 g2_fixed, target_lo = -l2 g2_fixed
        } else {
            const double g2 = std::clamp(-C / lambda2, -1.0, 1.0);
            S = C + lambda2 * g2;
        }
        worst = std::max(worst, std::abs(S - S_prev));
        S_prev = S;
    }
    return worst;
}

double lambda_max_search(const DesignMatrix& A, const Eigen::VectorXd& y,
                         const SolverConfig& cfg) {
    std::optional<FusedLassoWorkspace> ws;
    if (A.family != DesignFamily::Identity) ws.emplace(A.data, y);

    auto is_constant = [&](double lam) {
        EstimatorFit fit = solve_any(A, y, ws ? &*ws : nullptr, lam, cfg);
        return fit.achieved_tv <= 1e-10 * (1.0 + fit.coefficients.cwiseAbs().maxCoeff());
    };

    double lam = 1.0;
    if (is_constant(lam)) {
        // Halve until the fit stops being constant; the previous power is
        // the smallest constant-producing one up to factor 2.
        for (int k = 0; k < 80; ++k) {
            lam /= 2.0;
            if (!is_constant(lam)) return lam * 2.0;
        }
        return lam;  // constant all the way down: degenerate (y in span of 1)
    }
    for (int k = 0; k < 80; ++k) {
        lam *= 2.0;
        if (is_constant(lam)) return lam;
    }
    throw numeric_error("lambda_max_search: no constant fit reached; data scale too large");
}

std::vector<double> lambda_grid(double lambda_max, int size, double decades) {
    if (lambda_max <= 0) throw parameter_error("lambda_grid: lambda_max must be > 0");
    if (size < 1) throw parameter_error("lambda_grid: size must be >= 1");
    std::vector<double> grid(static_cast<size_t>(size));
    if (size == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    for (int i = 0; i < size; ++i)
        grid[static_cast<size_t>(i)] =
            lambda_max * std::pow(10.0, -decades * i / (size - 1));
    return grid;
}

}  // namespace pcreg
