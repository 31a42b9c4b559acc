#include "jced/turbo.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace jced {

namespace {

constexpr double kLogZero = -1e30;
constexpr double kPi = std::numbers::pi;

double clamp_llr(double v) { return std::clamp(v, -kLlrClamp, kLlrClamp); }

// log p(c=0), log p(c=1) from llr = log p0/p1.
std::pair<double, double> bit_logp(double llr) {
    return {-std::log1p(std::exp(-llr)), -std::log1p(std::exp(llr))};
}

// Per-(bit, value) log probabilities for one subcarrier, pins included.
// Returns M x 2 table; coded slots read from bit_llr via slot_of.
void fill_bit_table(const Frame& frame, int i, std::span<const double> bit_llr,
                    const std::vector<int>& slot_of, int n_bits,
                    std::array<std::array<double, 2>, 6>& lp) {
    for (int m = 0; m < n_bits; ++m) {
        if (m == 0 && frame.layout.is_training[i]) {
            lp[m] = {kLogZero, 0.0};  // training bit carries value 1
            continue;
        }
        const int slot = slot_of[std::size_t(i) * n_bits + m];
        const auto [l0, l1] = bit_logp(slot >= 0 ? bit_llr[slot] : 0.0);
        lp[m] = {l0, l1};
    }
}

std::vector<int> slot_lookup(const Frame& frame) {
    const int n_bits = frame.cfg.bits_per_symbol;
    std::vector<int> slot_of(std::size_t(frame.cfg.n_subcarriers) * n_bits, -1);
    for (std::size_t p = 0; p < frame.layout.coded_slots.size(); ++p) {
        const auto [i, m] = frame.layout.coded_slots[p];
        slot_of[std::size_t(i) * n_bits + m] = static_cast<int>(p);
    }
    return slot_of;
}

}  // namespace

void ReceiverConfig::validate() const {
    if (max_turbo_iters < 1 || max_eq_iters < 1 || max_gamp_iters < 1 || ldpc_iters < 1)
        throw std::invalid_argument("receiver: iteration limits must be >= 1");
}

std::vector<std::vector<double>> bits_to_symbols(std::span<const double> bit_llr,
                                                 const Frame& frame, int q,
                                                 const Constellation& constellation) {
    const int n = frame.cfg.n_subcarriers;
    const int n_bits = frame.cfg.bits_per_symbol;
    const int k_count = constellation.size();
    if (static_cast<int>(bit_llr.size()) != frame.cfg.data_bits())
        throw std::invalid_argument("bits_to_symbols: message count != Md");

    const auto slot_of = slot_lookup(frame);
    std::vector<std::vector<double>> log_beta(n, std::vector<double>(k_count));

    std::vector<int> pilot_label(n, -1);
    for (std::size_t p = 0; p < frame.layout.pilot_carriers.size(); ++p)
        pilot_label[frame.layout.pilot_carriers[p]] = frame.pilot_labels[q][p];

    std::array<std::array<double, 2>, 6> lp{};
    for (int i = 0; i < n; ++i) {
        auto& row = log_beta[i];
        if (frame.layout.is_pilot[i]) {
            std::fill(row.begin(), row.end(), kLogZero);
            row[pilot_label[i]] = 0.0;
            continue;
        }
        fill_bit_table(frame, i, bit_llr, slot_of, n_bits, lp);
        double hi = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < k_count; ++k) {
            double acc = 0.0;
            for (int m = 0; m < n_bits; ++m) acc += lp[m][constellation.label_bit(k, m)];
            row[k] = acc;
            hi = std::max(hi, acc);
        }
        double norm = 0.0;
        for (int k = 0; k < k_count; ++k) norm += std::exp(row[k] - hi);
        const double log_norm = hi + std::log(norm);
        for (int k = 0; k < k_count; ++k) row[k] = std::max(row[k] - log_norm, kLogZero);
    }
    return log_beta;
}

std::vector<double> leftward_symbol_likelihood(cplx y, cplx zhat, double nu_z,
                                               const Constellation& constellation,
                                               double noise_var) {
    if (nu_z < 0.0) throw std::invalid_argument("leftward likelihood: negative nu_z");
    std::vector<double> ll(constellation.size());
    for (int k = 0; k < constellation.size(); ++k) {
        const cplx s = constellation.points[k];
        const double v = std::max(std::norm(s) * nu_z + noise_var, 1e-300);
        ll[k] = -std::log(kPi * v) - std::norm(y - s * zhat) / v;
    }
    return ll;
}

std::vector<double> symbols_to_bits(std::span<const double> log_left,
                                    std::span<const double> bit_llr_in,
                                    const Constellation& constellation) {
    const int n_bits = constellation.bits_per_symbol;
    const int k_count = constellation.size();
    if (static_cast<int>(log_left.size()) != k_count)
        throw std::invalid_argument("symbols_to_bits: likelihood size mismatch");
    if (static_cast<int>(bit_llr_in.size()) != n_bits)
        throw std::invalid_argument("symbols_to_bits: bit message size mismatch");

    std::array<std::array<double, 2>, 6> lp{};
    for (int m = 0; m < n_bits; ++m) {
        const auto [l0, l1] = bit_logp(bit_llr_in[m]);
        lp[m] = {l0, l1};
    }

    // Exact leave-one-out sums via prefix/suffix, avoiding the division form
    // (degenerate incoming messages stay well defined).
    std::vector<double> num(std::size_t(n_bits) * 2, -std::numeric_limits<double>::infinity());
    std::array<double, 7> pre{}, suf{};
    for (int k = 0; k < k_count; ++k) {
        pre[0] = 0.0;
        for (int m = 0; m < n_bits; ++m)
            pre[m + 1] = pre[m] + lp[m][constellation.label_bit(k, m)];
        suf[n_bits] = 0.0;
        for (int m = n_bits; m-- > 0;)
            suf[m] = suf[m + 1] + lp[m][constellation.label_bit(k, m)];
        for (int m = 0; m < n_bits; ++m) {
            const int c = constellation.label_bit(k, m);
            const double term = log_left[k] + pre[m] + suf[m + 1];
            double& slot = num[std::size_t(m) * 2 + c];
            slot = slot > term ? slot + std::log1p(std::exp(term - slot))
                               : term + std::log1p(std::exp(slot - term));
        }
    }

    std::vector<double> ext(n_bits);
    for (int m = 0; m < n_bits; ++m)
        ext[m] = clamp_llr(num[std::size_t(m) * 2] - num[std::size_t(m) * 2 + 1]);
    return ext;
}

void soft_symbol_moments(std::span<const double> log_beta, const Constellation& constellation,
                         cplx& mean, double& var) {
    cplx mu(0.0, 0.0);
    double e2 = 0.0;
    for (int k = 0; k < constellation.size(); ++k) {
        const double p = std::exp(log_beta[k]);
        mu += p * constellation.points[k];
        e2 += p * std::norm(constellation.points[k]);
    }
    mean = mu;
    var = std::max(e2 - std::norm(mu), 0.0);
}

GampEqualizer::GampEqualizer(const Gm2HmmPrior& prior, const Constellation& constellation,
                             double noise_var, const ReceiverConfig& cfg, bool use_mc,
                             int n_ofdm_symbols)
    : prior_(prior),
      constellation_(constellation),
      noise_var_(noise_var),
      cfg_(cfg),
      use_mc_(use_mc),
      lambda_state_(n_ofdm_symbols, prior.lambda) {}

EqualizerOutput GampEqualizer::equalize(int q, std::span<const cplx> y,
                                        const std::vector<std::vector<double>>& log_beta,
                                        int turbo_iter) {
    (void)turbo_iter;
    const std::size_t l = prior_.length();
    auto& lambda_cur = lambda_state_.at(q);

    OutputChannelQam out_ch;
    out_ch.constellation = &constellation_;
    out_ch.log_beta = log_beta;
    out_ch.noise_var = noise_var_;

    GampOptions opts;
    opts.max_iters = cfg_.max_gamp_iters;
    opts.tol_rel = cfg_.gamp_tol_rel;
    opts.clip = cfg_.gamp_clip;
    opts.damping = cfg_.gamp_damping;

    EqualizerOutput out;
    std::vector<double> prev_lext, lext;
    GampResult g;
    const int eq_limit = use_mc_ ? cfg_.max_eq_iters : 1;
    for (int e = 1; e <= eq_limit; ++e) {
        InputChannelGm2 in_ch{lambda_cur, prior_.nu0, prior_.nu1};
        g = gamp_run(y, out_ch, in_ch, opts);
        out.gamp_iters += g.iters;
        out.inner_iters = e;
        if (g.aborted) {
            out.failed = true;
            out.failure = g.abort_reason;
            return out;
        }
        if (!use_mc_) break;

        lext.resize(l);
        for (std::size_t j = 0; j < l; ++j) lext[j] = clamp_llr(g.log_lext[j]);
        if (!prev_lext.empty()) {
            double msd = 0.0;
            for (std::size_t j = 0; j < l; ++j) {
                const double d = lext[j] - prev_lext[j];
                msd += d * d;
            }
            msd /= double(l);
            if (msd < cfg_.eq_llr_tol_scale * double(l)) break;
        }
        prev_lext = lext;
        if (e < eq_limit)
            lambda_cur = forward_backward(lext, prior_, cfg_.hmm_posterior_feedback);
    }

    out.zhat = std::move(g.zhat);
    out.nu_z.assign(y.size(), g.nu_z);
    out.xhat = std::move(g.xhat);
    return out;
}

PcsiEqualizer::PcsiEqualizer(std::vector<std::vector<cplx>> true_gains)
    : gains_(std::move(true_gains)) {}

EqualizerOutput PcsiEqualizer::equalize(int q, std::span<const cplx> y,
                                        const std::vector<std::vector<double>>& log_beta,
                                        int turbo_iter) {
    (void)y;
    (void)log_beta;
    (void)turbo_iter;
    EqualizerOutput out;
    out.zhat = gains_.at(q);
    out.nu_z.assign(out.zhat.size(), 0.0);
    return out;
}

ReceiverResult run_receiver(const std::vector<std::vector<cplx>>& y, const Frame& frame,
                            const LdpcCode& code, std::uint64_t interleaver_seed,
                            SoftEqualizer& equalizer, const ReceiverConfig& cfg,
                            const Constellation& constellation,
                            const std::optional<TrialTruth>& truth) {
    cfg.validate();
    const FrameConfig& fc = frame.cfg;
    const int q_count = fc.n_ofdm_symbols;
    const int md = fc.data_bits();
    const int mc = fc.coded_bits();
    if (code.n != mc) throw std::invalid_argument("run_receiver: code length != Mc");
    if (static_cast<int>(y.size()) != q_count)
        throw std::invalid_argument("run_receiver: observation count != Q");

    const auto slot_of = slot_lookup(frame);
    const int n_bits = fc.bits_per_symbol;

    ReceiverResult res;
    std::vector<std::vector<double>> bit_llr(q_count, std::vector<double>(md, 0.0));
    std::vector<double> channel_llr(mc, 0.0);
    std::vector<double> prev_posterior;
    res.xhat.assign(q_count, {});

    SisoResult siso;
    for (int t = 1; t <= cfg.max_turbo_iters; ++t) {
        const auto tic = std::chrono::steady_clock::now();
        TurboIterationDiag diag;

        double err2 = 0.0, ref2 = 0.0;
        bool have_xhat = true;
        for (int q = 0; q < q_count; ++q) {
            const auto log_beta = bits_to_symbols(bit_llr[q], frame, q, constellation);
            EqualizerOutput eq = equalizer.equalize(q, y[q], log_beta, t);
            if (eq.failed) {
                res.failed = true;
                res.stop_reason = "failed: " + eq.failure;
                res.turbo_iters = t;
                return res;
            }
            diag.eq_iters += eq.inner_iters;
            diag.gamp_iters += eq.gamp_iters;

            if (eq.xhat.empty()) {
                have_xhat = false;
            } else if (truth) {
                for (std::size_t j = 0; j < eq.xhat.size(); ++j) {
                    err2 += std::norm(eq.xhat[j] - truth->taps[q][j]);
                    ref2 += std::norm(truth->taps[q][j]);
                }
            }

            std::array<double, 6> in_llr{};
            for (int i : frame.layout.data_carriers) {
                const auto log_left =
                    leftward_symbol_likelihood(y[q][i], eq.zhat[i], eq.nu_z[i], constellation,
                                               fc.noise_var);
                for (int m = 0; m < n_bits; ++m) {
                    const int slot = slot_of[std::size_t(i) * n_bits + m];
                    in_llr[m] = (m == 0 && frame.layout.is_training[i]) ? -kLlrClamp
                                : slot >= 0                             ? bit_llr[q][slot]
                                                                        : 0.0;
                }
                const auto ext = symbols_to_bits(
                    log_left, std::span<const double>(in_llr.data(), n_bits), constellation);
                for (int m = 0; m < n_bits; ++m) {
                    const int slot = slot_of[std::size_t(i) * n_bits + m];
                    if (slot >= 0) channel_llr[std::size_t(q) * md + slot] = ext[m];
                }
            }
            res.xhat[q] = std::move(eq.xhat);
        }

        const auto dec_prior = deinterleave_llr(channel_llr, interleaver_seed);
        siso = siso_decode(code, dec_prior, cfg.ldpc_iters);
        const auto dec_ext = interleave_llr(siso.extrinsic, interleaver_seed);
        for (int q = 0; q < q_count; ++q)
            for (int p = 0; p < md; ++p) bit_llr[q][p] = dec_ext[std::size_t(q) * md + p];

        diag.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                tic)
                          .count();
        diag.nmse = have_xhat && truth && ref2 > 0.0
                        ? err2 / ref2
                        : std::numeric_limits<double>::quiet_NaN();
        if (truth) {
            int errors = 0;
            for (int b = 0; b < code.k; ++b) {
                const int bit = siso.posterior[code.info_positions[b]] < 0.0 ? 1 : 0;
                errors += bit != truth->info_bits[b];
            }
            diag.ber = double(errors) / double(code.k);
        } else {
            diag.ber = std::numeric_limits<double>::quiet_NaN();
        }
        res.per_iteration.push_back(diag);
        res.turbo_iters = t;

        if (siso.converged) {
            res.stop_reason = "decoder";
            break;
        }
        if (!prev_posterior.empty()) {
            double mean_abs = 0.0;
            for (int v = 0; v < code.n; ++v)
                mean_abs += std::abs(siso.posterior[v] - prev_posterior[v]);
            mean_abs /= double(code.n);
            if (mean_abs < cfg.turbo_llr_tol) {
                res.stop_reason = "llr-converged";
                break;
            }
        }
        prev_posterior = siso.posterior;
        if (t == cfg.max_turbo_iters) res.stop_reason = "max-iters";
    }

    res.info_decisions.resize(code.k);
    for (int b = 0; b < code.k; ++b)
        res.info_decisions[b] = siso.posterior[code.info_positions[b]] < 0.0 ? 1 : 0;
    return res;
}

}  // namespace jced
