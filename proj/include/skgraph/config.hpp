#pragma once

#include <vector>

#include "skgraph/error.hpp"

namespace skg {

/// Parameters of the histogram -> bit-string encoder.
///
/// A region signature is `n_bins` blocks of `m` bits each; an image
/// signature is the bitwise union of its region signatures and has the
/// same length. `n_max` caps the number of feature regions kept per image
/// and fixes the normalization of the image similarity.
struct SignatureConfig {
    int n_bins = 32;      ///< histogram bin count (= palette size)
    int m = 10;           ///< bits per block
    double offset = 0.05; ///< added to each bin value before quantization
    int n_max = 8;        ///< maximum feature regions per image

    void validate() const {
        if (n_bins <= 0 || m <= 0)
            throw config_error("SignatureConfig: n_bins and m must be positive");
        if (static_cast<long>(n_bins) * m > 4096)
            throw config_error("SignatureConfig: n_bins * m exceeds 4096-bit cap");
        if (offset < 0.0 || offset >= 1.0)
            throw config_error("SignatureConfig: offset must lie in [0,1)");
        if (n_max <= 0)
            throw config_error("SignatureConfig: n_max must be positive");
    }
};

inline bool operator==(const SignatureConfig& a, const SignatureConfig& b) {
    return a.n_bins == b.n_bins && a.m == b.m && a.offset == b.offset &&
           a.n_max == b.n_max;
}

/// Parameters of the interest-point / region extractor.
struct FeatureConfig {
    int size = 256;          ///< standardized image side S
    double alpha = 0.04;     ///< corner-response trace weight
    double sigma_d = 1.0;    ///< differentiation scale
    double sigma_i = 1.5;    ///< integration scale
    int neighborhood = 1;    ///< local-maximum radius A ((2A+1)^2 window)
    double percentile = 99.0;///< detection threshold percentile q

    /// Scales probed for the characteristic radius: 1.2 * 1.44^i, i = 0..7.
    std::vector<double> log_scales() const {
        std::vector<double> s;
        double v = 1.2;
        for (int i = 0; i < 8; ++i, v *= 1.44) s.push_back(v);
        return s;
    }

    void validate() const {
        if (size <= 1) throw config_error("FeatureConfig: size must exceed 1");
        if (sigma_d <= 0 || sigma_i <= 0)
            throw config_error("FeatureConfig: scales must be positive");
        if (neighborhood < 1)
            throw config_error("FeatureConfig: neighborhood radius must be >= 1");
        if (percentile < 0 || percentile > 100)
            throw config_error("FeatureConfig: percentile must lie in [0,100]");
    }
};

inline bool operator==(const FeatureConfig& a, const FeatureConfig& b) {
    return a.size == b.size && a.alpha == b.alpha && a.sigma_d == b.sigma_d &&
           a.sigma_i == b.sigma_i && a.neighborhood == b.neighborhood &&
           a.percentile == b.percentile;
}

}  // namespace skg
