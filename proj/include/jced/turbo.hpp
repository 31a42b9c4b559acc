#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jced/constellation.hpp"
#include "jced/gamp.hpp"
#include "jced/hmm.hpp"
#include "jced/ldpc.hpp"
#include "jced/modem.hpp"
#include "jced/prior.hpp"

namespace jced {

struct ReceiverConfig {
    int max_turbo_iters = 10;
    int max_eq_iters = 5;
    int max_gamp_iters = 15;
    int ldpc_iters = 25;
    double turbo_llr_tol = 1e-2;       // mean |delta LLR| on decoder soft bits
    double eq_llr_tol_scale = 1e-4;    // threshold = scale * L on mean-square state-LLR change
    double gamp_tol_rel = 1e-6;
    double gamp_clip = 0.99;
    double gamp_damping = 0.0;
    bool hmm_posterior_feedback = false;

    void validate() const;
};

// Rightward pmfs into the measurement nodes, one per subcarrier.
// bit_llr holds the per-coded-slot messages (log p0/p1) for one OFDM symbol;
// pilot subcarriers get degenerate pmfs, training MSBs are pinned to 1.
std::vector<std::vector<double>> bits_to_symbols(std::span<const double> bit_llr,
                                                 const Frame& frame, int q,
                                                 const Constellation& constellation);

// Leftward per-symbol likelihood log CN(y; s zhat, |s|^2 nu_z + nu_w).
std::vector<double> leftward_symbol_likelihood(cplx y, cplx zhat, double nu_z,
                                               const Constellation& constellation,
                                               double noise_var);

// Extrinsic bit messages out of one symbol-mapping node. log_left and
// log_beta are pmf-length; bit_llr_in are the incoming (rightward) per-bit
// messages for this subcarrier (length M). Entries for pinned bits are left
// untouched by the caller.
std::vector<double> symbols_to_bits(std::span<const double> log_left,
                                    std::span<const double> bit_llr_in,
                                    const Constellation& constellation);

// Soft symbol moments of a pmf: mean and variance.
void soft_symbol_moments(std::span<const double> log_beta, const Constellation& constellation,
                         cplx& mean, double& var);

// One soft channel estimate per OFDM symbol.
struct EqualizerOutput {
    std::vector<cplx> zhat;    // length N
    std::vector<double> nu_z;  // length N
    std::vector<cplx> xhat;    // length L (empty when the equalizer has none)
    int inner_iters = 0;       // equalizer iterations consumed
    int gamp_iters = 0;
    bool failed = false;
    std::string failure;
};

// Per-OFDM-symbol soft equalizer plugged into the turbo scaffold. Stateful
// across turbo iterations within one trial.
class SoftEqualizer {
  public:
    virtual ~SoftEqualizer() = default;
    virtual EqualizerOutput equalize(int q, std::span<const cplx> y,
                                     const std::vector<std::vector<double>>& log_beta,
                                     int turbo_iter) = 0;
};

// GAMP with (use_mc) or without the Markov-chain block.
class GampEqualizer final : public SoftEqualizer {
  public:
    GampEqualizer(const Gm2HmmPrior& prior, const Constellation& constellation, double noise_var,
                  const ReceiverConfig& cfg, bool use_mc, int n_ofdm_symbols);
    EqualizerOutput equalize(int q, std::span<const cplx> y,
                             const std::vector<std::vector<double>>& log_beta,
                             int turbo_iter) override;

  private:
    const Gm2HmmPrior& prior_;
    const Constellation& constellation_;
    double noise_var_;
    ReceiverConfig cfg_;
    bool use_mc_;
    std::vector<std::vector<double>> lambda_state_;  // per OFDM symbol
};

// Perfect-CSI reduction: zhat = true gains, nu_z = 0, no channel estimation.
class PcsiEqualizer final : public SoftEqualizer {
  public:
    explicit PcsiEqualizer(std::vector<std::vector<cplx>> true_gains);
    EqualizerOutput equalize(int q, std::span<const cplx> y,
                             const std::vector<std::vector<double>>& log_beta,
                             int turbo_iter) override;

  private:
    std::vector<std::vector<cplx>> gains_;
};

struct TrialTruth {
    std::vector<std::vector<cplx>> taps;   // [Q][L]
    std::vector<std::uint8_t> info_bits;
};

struct TurboIterationDiag {
    double nmse = 0.0;  // channel NMSE over the codeword, linear
    double ber = 0.0;   // info-bit error rate at this iteration
    int eq_iters = 0;
    int gamp_iters = 0;
    double millis = 0.0;
};

struct ReceiverResult {
    std::vector<std::uint8_t> info_decisions;
    std::vector<std::vector<cplx>> xhat;  // [Q][L] final channel estimates
    std::vector<TurboIterationDiag> per_iteration;
    int turbo_iters = 0;
    std::string stop_reason;  // "decoder", "llr-converged", "max-iters", "failed"
    bool failed = false;
};

// Full receiver: mapping-node messages, equalizer, SISO decoding, scheduled
// per the factor-graph flow, with the three stop rules.
ReceiverResult run_receiver(const std::vector<std::vector<cplx>>& y, const Frame& frame,
                            const LdpcCode& code, std::uint64_t interleaver_seed,
                            SoftEqualizer& equalizer, const ReceiverConfig& cfg,
                            const Constellation& constellation,
                            const std::optional<TrialTruth>& truth = std::nullopt);

}  // namespace jced
