#include "pcreg/ric.hpp"

#include <algorithm>
#include <cmath>

#include "pcreg/errors.hpp"
#include "pcreg/rng.hpp"
#include "pcreg/signal.hpp"

namespace pcreg {

namespace {

constexpr double kFeasSlack = 1e-10;

Eigen::VectorXd constant_unit(int p, double sign) {
    return Eigen::VectorXd::Constant(p, sign / std::sqrt(static_cast<double>(p)));
}

// Pulls a unit vector inside the TV budget by mixing toward the constant
// direction: TV((1-th) v + th u) = (1-th) TV(v), and the renormalised TV
// ratio is continuous in th with value 0 at th = 1, so a root exists.
Eigen::VectorXd project_to_budget(const Eigen::VectorXd& v, double t) {
    const int p = static_cast<int>(v.size());
    Eigen::VectorXd x = v.normalized();
    if (total_variation(x) <= t + kFeasSlack) return x;
    if (t <= 0) return constant_unit(p, x.sum() >= 0 ? 1.0 : -1.0);

    const Eigen::VectorXd u = constant_unit(p, x.sum() >= 0 ? 1.0 : -1.0);
    const double target = t * (1.0 - 1e-9);
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 200; ++k) {
        const double th = 0.5 * (lo + hi);
        Eigen::VectorXd mix = ((1.0 - th) * x + th * u).normalized();
        const double tv = total_variation(mix);
        if (tv > target) lo = th;
        else hi = th;
    }
    Eigen::VectorXd out = ((1.0 - hi) * x + hi * u).normalized();
    return out;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_constraint_set(int p, double t, int count,
                                                   uint64_t seed) {
    if (p < 1) throw parameter_error("sample_constraint_set: p must be >= 1");
    if (t < 0) throw parameter_error("sample_constraint_set: t must be >= 0");
    if (count < 1) throw parameter_error("sample_constraint_set: count must be >= 1");

    Rng rng(seed);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<size_t>(count));
    for (int s = 0; s < count; ++s) {
        if (t <= 0 || p == 1) {
            out.push_back(constant_unit(p, rng.uniform() < 0.5 ? -1.0 : 1.0));
            continue;
        }
        // Piecewise-constant draw: geometric segment count, Gaussian levels.
        Eigen::VectorXd v(p);
        for (;;) {
            int segments = 1;
            while (segments < p && rng.uniform() < 0.75) ++segments;
            std::vector<int> cuts;
            if (segments > 1) {
                std::vector<int> positions = rng.permutation(p - 1);
                cuts.assign(positions.begin(), positions.begin() + (segments - 1));
                for (auto& c : cuts) ++c;  // 1-based boundaries
                std::sort(cuts.begin(), cuts.end());
            }
            int seg = 0;
            double level = rng.normal();
            for (int i = 0; i < p; ++i) {
                if (seg < static_cast<int>(cuts.size()) && i + 1 > cuts[static_cast<size_t>(seg)]) {
                    ++seg;
                    level = rng.normal();
                }
                v[i] = level;
            }
            if (v.norm() > 1e-12) break;
        }
        out.push_back(project_to_budget(v, t));
    }
    return out;
}

RicCertificate empirical_ric(const DesignMatrix& A, double t, int count,
                             uint64_t seed) {
    const int p = A.p();
    const auto samples = sample_constraint_set(p, t, count, seed);

    RicCertificate cert;
    cert.t = t;
    cert.samples = count;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& x : samples) {
        const double norm = (A.data * x).norm();
        if (norm < lo) { lo = norm; cert.min_witness = x; }
        if (norm > hi) { hi = norm; cert.max_witness = x; }
    }

    // Local refinement: 100 projected gradient steps on +-||Ax||^2, with the
    // TV-budget mixing as the projection. Extremes only move when a step
    // genuinely improves them.
    const Eigen::MatrixXd AtA = A.data.transpose() * A.data;
    double step_scale;
    {
        // Power iteration for the Lipschitz scale of the gradient.
        Eigen::VectorXd w = Eigen::VectorXd::Ones(p).normalized();
        for (int k = 0; k < 30; ++k) w = (AtA * w).normalized();
        const double lmax = w.dot(AtA * w);
        step_scale = lmax > 0 ? 1.0 / (2.0 * lmax) : 0.0;
    }
    auto refine = [&](Eigen::VectorXd x, bool maximise) {
        double best = (A.data * x).norm();
        Eigen::VectorXd best_x = x;
        for (int k = 0; k < 100 && step_scale > 0; ++k) {
            const Eigen::VectorXd grad = 2.0 * (AtA * x);
            Eigen::VectorXd cand = maximise ? (x + step_scale * grad).eval()
                                            : (x - step_scale * grad).eval();
            if (cand.norm() < 1e-12) break;
            cand = project_to_budget(cand, t);
            const double norm = (A.data * cand).norm();
            if (maximise ? norm > best : norm < best) {
                best = norm;
                best_x = cand;
            }
            x = cand;
        }
        return std::make_pair(best, best_x);
    };
    auto [min_ref, min_w] = refine(cert.min_witness, false);
    auto [max_ref, max_w] = refine(cert.max_witness, true);
    if (min_ref < lo) { lo = min_ref; cert.min_witness = min_w; }
    if (max_ref > hi) { hi = max_ref; cert.max_witness = max_w; }

    cert.min_norm = lo;
    cert.max_norm = hi;
    return cert;
}

void check_interval(RicCertificate& cert, double zeta, double margin) {
    const double lo = 1.0 - zeta - (1.0 - zeta) / std::sqrt(2.0) - margin;
    const double hi = 1.0 + zeta + (1.0 - zeta) / std::sqrt(2.0) + margin;
    cert.zeta = zeta;
    cert.interval_ok = cert.min_norm >= lo && cert.max_norm <= hi;
}

}  // namespace pcreg
