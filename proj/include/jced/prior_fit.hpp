#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "jced/channel_gen.hpp"
#include "jced/prior.hpp"

namespace jced {

// Per-lag EM fit of the two-component zero-mean complex Gaussian mixture.
// The mixture is fit independently per lag; the chain is fit afterwards from
// MAP state counts (two-stage recipe, no Baum-Welch).
struct EmFitOptions {
    int max_iters = 200;
    double tol = 1e-8;          // max absolute parameter change
    double variance_floor = 1e-12;
};

struct EmFitResult {
    std::vector<double> lambda, nu0, nu1;
    // State posterior omega[j][u] = Pr{d_{j,u} = 1 | x_{j,u}}.
    std::vector<std::vector<double>> omega;
    std::vector<int> iters;                    // per lag
    std::vector<std::uint8_t> degenerate;      // per lag: all-zero energy
    // Per-lag data log-likelihood trace, one entry per EM iteration.
    std::vector<std::vector<double>> loglik_trace;
};

// init: lambda/nu0/nu1 arrays of length L (or length 1, broadcast). Empty
// init uses lambda=0.5, nu1=2*mean|x|^2, nu0=0.02*mean|x|^2 per lag.
EmFitResult em_fit_gm2(std::span<const TapVector> realizations, const Gm2HmmPrior& init,
                       const EmFitOptions& opts = {});

// MAP states per (lag, realization): floor(omega + 0.5).
std::vector<std::vector<std::uint8_t>> map_states(const std::vector<std::vector<double>>& omega);

struct SwitchingEstimate {
    std::vector<double> p01, p10;          // length L; entry L-1 copies L-2
    std::vector<std::uint8_t> p01_flagged; // zero-count denominator, value filled from neighbor
    std::vector<std::uint8_t> p10_flagged;
};

SwitchingEstimate estimate_switching_probs(const std::vector<std::vector<double>>& omega);

struct ConditionalCorrelation {
    std::vector<std::complex<double>> value;     // length L-1
    std::vector<std::uint8_t> insufficient;      // fewer than 10 qualifying pairs
};

// Normalized correlation of (x_{j+1}, x_j) over realizations with
// d_{j+1} = d_j = 1.
ConditionalCorrelation conditional_correlation(
    std::span<const TapVector> realizations,
    const std::vector<std::vector<std::uint8_t>>& states);

struct PriorFitReport {
    Gm2HmmPrior prior;             // consistency-enforced
    double max_lambda_shift = 0.0; // |lambda_EM - lambda_final| max over lags
    std::vector<std::uint8_t> degenerate_lags;
};

// Full two-stage pipeline: EM, MAP-state transition counts, consistency.
PriorFitReport fit_gm2_hmm_prior(std::span<const TapVector> realizations,
                                 const EmFitOptions& opts = {});

}  // namespace jced
