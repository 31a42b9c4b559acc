#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jced/config.hpp"
#include "jced/fft.hpp"
#include "jced/rng.hpp"

namespace jced {

// Saleh-Valenzuela cluster model parameters in SI units (rates 1/s, decays s).
struct SalehValenzuelaParams {
    double cluster_rate = 0.0;         // Lambda
    double component_rate1 = 0.0;      // lambda_1
    double component_rate2 = 0.0;      // lambda_2
    double mixture_weight = 0.0;       // beta in [0,1]
    double cluster_decay = 0.0;        // Gamma, seconds
    double intra_cluster_decay = 0.0;  // gamma, seconds
    double nakagami_mean = 1.0;        // m_0 (linear)
    double nakagami_std = 0.0;         // m-hat_0
    double mean_cluster_count = 1.0;   // C-bar
    int components_per_cluster = 100;  // K
    int sync_offset_lags = 0;          // Lpre (baud counts)
    double sync_rate = 0.0;            // Lambda_0 (1/s)
    double amplitude_scale = 1.0;      // global energy calibration, see README

    void validate() const;
    // Keys use ns-based units (sv_cluster_rate_per_ns etc.); see configs/.
    static SalehValenzuelaParams from_config(const Config& cfg);
};

// SRRC transmit/receive pulse pair; the cascade g_r * g_t is the Nyquist
// raised cosine with peak 1 at t = 0.
struct PulsePair {
    double rolloff = 0.5;
    double baud_interval = 0.0;   // T, seconds
    int truncation_halfwidth = 10;  // baud

    void validate() const;
    double srrc(double t) const;           // unit-energy SRRC, zero outside truncation
    double raised_cosine(double t) const;  // g_r * g_t, zero outside 2x truncation
    // Fine-grid samples of the SRRC over the truncation window, normalized to
    // unit discrete energy (sum g^2 dt = 1).
    std::vector<double> sampled_srrc(int oversample) const;
};

struct TapVector {
    std::vector<cplx> taps;
    std::vector<std::uint8_t> states;  // optional hidden states; empty if unknown
};

// Continuous impulse description: one (delay, amplitude) pair per path.
struct PathList {
    std::vector<double> delays;  // seconds
    std::vector<cplx> amps;
};

PathList generate_impulse_response(const SalehValenzuelaParams& params, Rng& rng);

// taps_j = sum_p amp_p * rc(j*T - delay_p). Sets *truncated_energy_warn when
// more than 1% of the pulse-shaped energy falls at lags >= L.
TapVector sample_taps(const PathList& paths, const PulsePair& pulses, int n_taps,
                      bool* truncated_energy_warn = nullptr);

// rho_j = mean |x_j|^2 over realizations.
std::vector<double> estimate_pdp(std::span<const TapVector> realizations);

// Binary dump: uint32 L, uint32 count, then count*L little-endian complex64.
void dump_taps(const std::string& path, std::span<const TapVector> realizations);
std::vector<TapVector> load_taps(const std::string& path);

}  // namespace jced
