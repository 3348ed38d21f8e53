#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "pcreg/design.hpp"

namespace pcreg {

// Empirical envelope of ||Ax|| over sampled unit vectors with ||Dx||_1 <= t.
// Sampling plus local refinement cannot certify a uniform bound; the
// certificate is an empirical lower/upper envelope with re-checkable
// witnesses.
struct RicCertificate {
    double t = 0.0;
    int samples = 0;
    double min_norm = 0.0;
    double max_norm = 0.0;
    std::optional<double> zeta;        // set when checked against the interval
    std::optional<bool> interval_ok;
    Eigen::VectorXd min_witness;
    Eigen::VectorXd max_witness;
};

// Random elements of {v : ||v|| = 1, ||Dv||_1 <= t}: piecewise-constant
// draws (geometric segment count, Gaussian levels) normalised, then mixed
// toward the constant unit vector until the TV budget holds.
std::vector<Eigen::VectorXd> sample_constraint_set(int p, double t, int count,
                                                   uint64_t seed);

// Envelope over `count` samples; each extreme then refined by 100 projected
// gradient steps on +-||Ax||^2 within the constraint set.
RicCertificate empirical_ric(const DesignMatrix& A, double t, int count,
                             uint64_t seed);

// Marks the certificate against [1 - z - (1-z)/sqrt(2) - margin,
//                                1 + z + (1-z)/sqrt(2) + margin].
void check_interval(RicCertificate& cert, double zeta, double margin);

}  // namespace pcreg
