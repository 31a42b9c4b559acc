#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "jced/constellation.hpp"
#include "jced/fft.hpp"
#include "jced/rng.hpp"

namespace jced {

// One codeword's OFDM dimensioning. Md data bits and Mt training bits share
// the Nd = N - Np data subcarriers; the codeword spans Q OFDM symbols.
struct FrameConfig {
    int n_subcarriers = 0;   // N
    int n_taps = 0;          // L < N
    int bits_per_symbol = 0; // M
    int n_pilots = 0;        // Np
    int n_training = 0;      // Mt, per OFDM symbol
    int n_ofdm_symbols = 1;  // Q
    double rate = 0.0;       // R
    double noise_var = 0.0;  // nu_w

    int data_carriers() const { return n_subcarriers - n_pilots; }            // Nd
    int data_bits() const { return data_carriers() * bits_per_symbol - n_training; }  // Md
    int coded_bits() const { return data_bits() * n_ofdm_symbols; }           // Mc
    int info_bits() const;                                                    // Mi = R*Mc
    double spectral_efficiency() const;                                       // eta = Md*R/N

    void validate() const;
};

// eta in info bits per channel use; Eb normalized per information bit,
// pilot/training overhead included through eta itself.
double noise_variance_from_ebn0(double ebn0_db, double eta);

// Seeded random interleaver. interleave(deinterleave(x)) == x.
std::vector<std::uint8_t> interleave(std::span<const std::uint8_t> bits, std::uint64_t seed);
std::vector<std::uint8_t> deinterleave(std::span<const std::uint8_t> bits, std::uint64_t seed);
std::vector<double> deinterleave_llr(std::span<const double> llrs, std::uint64_t seed);
std::vector<double> interleave_llr(std::span<const double> llrs, std::uint64_t seed);

// Static placement of pilots, training bits and coded-bit slots. Pilot
// subcarriers are drawn once per frame; training bits sit at the MSB of
// uniformly spaced data subcarriers and always carry bit value 1.
struct FrameLayout {
    std::vector<int> pilot_carriers;  // sorted, size Np
    std::vector<int> data_carriers;   // sorted, size Nd
    std::vector<std::uint8_t> is_pilot;     // size N
    std::vector<std::uint8_t> is_training;  // size N; training bit is at m = 0
    std::vector<std::pair<int, int>> coded_slots;  // size Md: (subcarrier, bit index)
};

struct Frame {
    FrameConfig cfg;
    FrameLayout layout;
    std::vector<std::vector<int>> pilot_labels;    // [Q][Np] constellation indices
    std::vector<std::vector<cplx>> symbols;        // [Q][N]
    std::vector<std::vector<std::uint8_t>> placed_bits;  // [Q][Md] coded (interleaved) bits
};

FrameLayout make_layout(const FrameConfig& cfg, Rng& rng);

// coded_bits.size() must equal cfg.coded_bits(); rng drives pilot placement
// and pilot symbol values.
Frame assemble_frame(std::span<const std::uint8_t> coded_bits, const FrameConfig& cfg,
                     const Constellation& constellation, Rng& rng);

// z_i = sum_j Phi_ij x_j with Phi_ij = exp(-2*pi*i*ij/N).
std::vector<cplx> subcarrier_gains(std::span<const cplx> taps, int n_subcarriers);

// y_i = s_i z_i + w_i with w_i ~ CN(0, nu_w).
std::vector<cplx> observe(std::span<const cplx> symbols, std::span<const cplx> gains,
                          double noise_var, Rng& rng);

}  // namespace jced
