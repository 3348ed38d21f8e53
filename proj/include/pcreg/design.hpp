#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

namespace pcreg {

enum class DesignFamily { Identity, Band, GaussianIdentity, GaussianBandCov, External };

std::string family_name(DesignFamily f);

struct DesignMatrix {
    Eigen::MatrixXd data;                 // n x p, dense
    DesignFamily family = DesignFamily::External;
    int band_h = -1;                      // bandwidth for Band / GaussianBandCov
    std::optional<uint64_t> seed;
    bool row_scaled = false;              // rows carry an n^{-1/2} factor

    int n() const { return static_cast<int>(data.rows()); }
    int p() const { return static_cast<int>(data.cols()); }
};

struct CovarianceSpec {
    enum class Kind { Identity, BandTaper };
    Kind kind = Kind::Identity;
    int h = 0;  // BandTaper bandwidth
};

DesignMatrix identity_design(int p);

// Entries i.i.d. N(0,1) on the band |i-j| <= h, exactly zero outside.
DesignMatrix band_design(int n, int p, int h, uint64_t seed);

// Rows i.i.d. N(0, Sigma) drawn as Sigma^{1/2} z; optional n^{-1/2} row scale.
DesignMatrix gaussian_design(int n, int p, const CovarianceSpec& cov,
                             uint64_t seed, bool row_scaled);

// Bartlett taper Sigma_ij = max(0, 1 - |i-j|/(h+1)); PSD for every h.
Eigen::MatrixXd bartlett_taper(int p, int h);

// Symmetric PSD square root via eigen-decomposition, negative eigenvalues
// clamped to zero. Throws numeric_error when the input is far from PSD.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sigma);

struct LoadOptions {
    std::optional<int> response_col;  // 1-based column index; default: last
    bool standardise = false;         // design columns to mean 0, sample sd 1
};

struct LoadedData {
    DesignMatrix design;
    Eigen::VectorXd response;
};

// Reads a rectangular numeric CSV; the response column (default: last) is
// split off and the rest becomes an External-family design.
LoadedData load_csv(const std::string& path, const LoadOptions& opts = {});

}  // namespace pcreg
