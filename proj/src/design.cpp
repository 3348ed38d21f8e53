#include "pcreg/design.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdlib>
#include <string>

#include "pcreg/csv.hpp"
#include "pcreg/errors.hpp"
#include "pcreg/rng.hpp"

namespace pcreg {

std::string family_name(DesignFamily f) {
    switch (f) {
        case DesignFamily::Identity: return "identity";
        case DesignFamily::Band: return "band";
        case DesignFamily::GaussianIdentity: return "gaussian-identity";
        case DesignFamily::GaussianBandCov: return "gaussian-bandcov";
        case DesignFamily::External: return "external";
    }
    return "unknown";
}

DesignMatrix identity_design(int p) {
    if (p < 1) throw parameter_error("identity_design: p must be >= 1");
    DesignMatrix d;
    d.data = Eigen::MatrixXd::Identity(p, p);
    d.family = DesignFamily::Identity;
    return d;
}

DesignMatrix band_design(int n, int p, int h, uint64_t seed) {
    if (n < 1 || p < 1) throw parameter_error("band_design: n, p must be >= 1");
    if (h < 0) throw parameter_error("band_design: h must be >= 0");
    DesignMatrix d;
    d.data = Eigen::MatrixXd::Zero(n, p);
    Rng rng(seed);
    // Row-major fill so the stream layout is independent of Eigen storage.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            if (std::abs(i - j) <= h) d.data(i, j) = rng.normal();
    d.family = DesignFamily::Band;
    d.band_h = h;
    d.seed = seed;
    return d;
}

Eigen::MatrixXd bartlett_taper(int p, int h) {
    Eigen::MatrixXd sigma(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            sigma(i, j) = std::max(0.0, 1.0 - std::abs(i - j) / (h + 1.0));
    return sigma;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success)
        throw numeric_error("psd_sqrt: eigen-decomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    const double scale = std::max(1.0, std::abs(ev[ev.size() - 1]));
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-8 * scale)
            throw numeric_error("psd_sqrt: matrix is not positive semi-definite");
        ev[i] = std::sqrt(std::max(0.0, ev[i]));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

DesignMatrix gaussian_design(int n, int p, const CovarianceSpec& cov,
                             uint64_t seed, bool row_scaled) {
    if (n < 1 || p < 1) throw parameter_error("gaussian_design: n, p must be >= 1");
    DesignMatrix d;
    d.data.resize(n, p);
    Rng rng(seed);
    if (cov.kind == CovarianceSpec::Kind::Identity) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j) d.data(i, j) = rng.normal();
        d.family = DesignFamily::GaussianIdentity;
    } else {
        if (cov.h < 0) throw parameter_error("gaussian_design: taper h must be >= 0");
        const Eigen::MatrixXd root = psd_sqrt(bartlett_taper(p, cov.h));
        Eigen::VectorXd z(p);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) z[j] = rng.normal();
            d.data.row(i) = (root * z).transpose();
        }
        d.family = DesignFamily::GaussianBandCov;
        d.band_h = cov.h;
    }
    if (row_scaled) d.data *= 1.0 / std::sqrt(static_cast<double>(n));
    d.seed = seed;
    d.row_scaled = row_scaled;
    return d;
}

LoadedData load_csv(const std::string& path, const LoadOptions& opts) {
    CsvTable table = read_csv(path);
    const long n = table.data.rows();
    const long cols = table.data.cols();
    if (n < 2) throw ingest_error("need at least 2 data rows, got " + std::to_string(n), n, 0);
    if (cols < 2)
        throw ingest_error("need at least 2 columns (design + response)", 0, cols);

    long resp = cols - 1;
    if (opts.response_col) {
        resp = *opts.response_col - 1;
        if (resp < 0 || resp >= cols)
            throw parameter_error("response column " + std::to_string(*opts.response_col) +
                                  " outside 1.." + std::to_string(cols));
    } else if (table.header) {
        for (long c = 0; c < cols; ++c)
            if ((*table.header)[static_cast<size_t>(c)] == "y") resp = c;
    }

    LoadedData out;
    out.response = table.data.col(resp);
    out.design.data.resize(n, cols - 1);
    long k = 0;
    for (long c = 0; c < cols; ++c)
        if (c != resp) out.design.data.col(k++) = table.data.col(c);
    out.design.family = DesignFamily::External;

    if (opts.standardise) {
        for (long c = 0; c < out.design.data.cols(); ++c) {
            auto col = out.design.data.col(c);
            const double mean = col.mean();
            col.array() -= mean;
            const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
            if (sd > 0) col /= sd;
        }
    }
    return out;
}

}  // namespace pcreg
