#pragma once

#include <span>
#include <string>
#include <vector>

#include "jced/constellation.hpp"
#include "jced/fft.hpp"

namespace jced {

// Finite-alphabet measurement channel: y_i = s_i z_i + w_i with s_i drawn
// from the constellation under the per-subcarrier prior pmf beta_i.
struct OutputChannelQam {
    const Constellation* constellation = nullptr;
    // log_beta[i][k]: log prior pmf over constellation points, normalized.
    std::vector<std::vector<double>> log_beta;
    double noise_var = 0.0;  // nu_w
};

// Two-component zero-mean complex Gaussian mixture prior per lag.
struct InputChannelGm2 {
    std::vector<double> lambda, nu0, nu1;
};

// Scalar output-channel update for one subcarrier. Returns the posterior
// mean/variance of z through g = e_hat/nu_z and gprime = (nu_e/nu_z - 1)/nu_z.
// nu_e is clipped at clip*nu_z inside gprime so that -gprime stays positive;
// nu_e_raw carries the unclipped posterior variance.
struct GoutResult {
    cplx g;
    double gprime;
    double nu_e_raw;
};
GoutResult gout_qam(cplx y, cplx p_hat, double nu_z, std::span<const double> log_beta,
                    const Constellation& constellation, double noise_var,
                    std::span<double> log_xi, double clip = 0.99);

// Scalar input-channel update for one lag: posterior mean/variance of x under
// the GM2 prior and pseudo-observation r_hat ~ CN(x, nu_r). alpha is the
// posterior big-state probability, log_lext the extrinsic state likelihood
// ratio handed to the Markov chain.
struct GinResult {
    cplx g;
    double gprime;
    double alpha;
    double log_lext;
};
GinResult gin_gm2(cplx r_hat, double nu_r, double lambda, double nu0, double nu1);

struct GampOptions {
    int max_iters = 15;
    double tol_rel = 1e-6;  // on mean-square tap change, relative to prior energy
    double clip = 0.99;
    double damping = 0.0;   // 0 = none; fraction of the previous iterate kept
};

struct GampResult {
    std::vector<cplx> xhat;        // tap posterior means, length L
    std::vector<double> nu_x;      // tap posterior variances
    std::vector<cplx> zhat;        // subcarrier gain means, length N
    double nu_z = 0.0;             // common gain variance (unit-modulus DFT)
    std::vector<std::vector<double>> log_xi;  // symbol posterior pmfs [N][2^M]
    std::vector<double> log_lext;  // per-lag extrinsic state LLR
    std::vector<double> alpha;     // per-lag posterior state probability
    int iters = 0;
    bool aborted = false;
    std::string abort_reason;
};

// Generalized approximate message passing over the truncated unit-modulus
// DFT. Per iteration: two length-N FFTs plus O(N * 2^M) pmf work.
GampResult gamp_run(std::span<const cplx> y, const OutputChannelQam& out_ch,
                    const InputChannelGm2& in_ch, const GampOptions& opts = {});

}  // namespace jced
