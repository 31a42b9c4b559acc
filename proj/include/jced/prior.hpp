#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace jced {

// Lag-dependent two-state Gaussian mixture with a Markov chain on the hidden
// state. p01[j] = Pr{d_{j+1}=0 | d_j=1}, p10[j] = Pr{d_{j+1}=1 | d_j=0};
// entries at j = L-1 duplicate j = L-2 (no outgoing transition).
struct Gm2HmmPrior {
    std::vector<double> lambda;  // Pr{d_j = 1}
    std::vector<double> nu0;     // small-state variance
    std::vector<double> nu1;     // big-state variance, > nu0
    std::vector<double> p01;
    std::vector<double> p10;

    std::size_t length() const { return lambda.size(); }
    void validate(double consistency_tol = 1e-3) const;

    // max_j |lambda_{j+1} - (lambda_j (1-p01_j) + (1-lambda_j) p10_j)|
    double consistency_residual() const;

    // Text format, one row per lag: j lambda nu0 nu1 p01 p10.
    void save(const std::string& path) const;
    static Gm2HmmPrior load(const std::string& path);
};

// Recomputes lambda_{j+1} forward from lambda_0 and the switching
// probabilities so the stationarity relation holds exactly.
Gm2HmmPrior enforce_consistency(Gm2HmmPrior prior);

}  // namespace jced
