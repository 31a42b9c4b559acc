#include "jced/modem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jced {

int FrameConfig::info_bits() const {
    const double mi = rate * coded_bits();
    const long r = std::lround(mi);
    if (std::abs(mi - double(r)) > 1e-6)
        throw std::invalid_argument("frame: R*Mc is not an integer");
    return static_cast<int>(r);
}

double FrameConfig::spectral_efficiency() const {
    return data_bits() * rate / n_subcarriers;
}

void FrameConfig::validate() const {
    if (n_subcarriers <= 0 || n_taps <= 0 || n_taps >= n_subcarriers)
        throw std::invalid_argument("frame: need 0 < L < N");
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6)
        throw std::invalid_argument("frame: M must be 2, 4 or 6");
    if (n_pilots < 0 || n_pilots > n_subcarriers)
        throw std::invalid_argument("frame: Np out of range");
    if (n_training < 0 || n_training > data_carriers())
        throw std::invalid_argument("frame: Mt must be in [0, Nd] (one MSB per data subcarrier)");
    if (n_ofdm_symbols < 1) throw std::invalid_argument("frame: Q must be >= 1");
    if (rate <= 0.0 || rate >= 1.0) throw std::invalid_argument("frame: R must be in (0,1)");
    if (noise_var < 0.0) throw std::invalid_argument("frame: negative noise variance");
    info_bits();  // throws if not integral
}

double noise_variance_from_ebn0(double ebn0_db, double eta) {
    if (eta <= 0.0) throw std::invalid_argument("noise_variance_from_ebn0: eta must be positive");
    return 1.0 / (eta * std::pow(10.0, ebn0_db / 10.0));
}

namespace {

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> d(0, i - 1);
        std::swap(p[i - 1], p[d(rng)]);
    }
    return p;
}

}  // namespace

std::vector<std::uint8_t> interleave(std::span<const std::uint8_t> bits, std::uint64_t seed) {
    const auto p = permutation(bits.size(), seed);
    std::vector<std::uint8_t> out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits[p[i]];
    return out;
}

std::vector<std::uint8_t> deinterleave(std::span<const std::uint8_t> bits, std::uint64_t seed) {
    const auto p = permutation(bits.size(), seed);
    std::vector<std::uint8_t> out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out[p[i]] = bits[i];
    return out;
}

std::vector<double> interleave_llr(std::span<const double> llrs, std::uint64_t seed) {
    const auto p = permutation(llrs.size(), seed);
    std::vector<double> out(llrs.size());
    for (std::size_t i = 0; i < llrs.size(); ++i) out[i] = llrs[p[i]];
    return out;
}

std::vector<double> deinterleave_llr(std::span<const double> llrs, std::uint64_t seed) {
    const auto p = permutation(llrs.size(), seed);
    std::vector<double> out(llrs.size());
    for (std::size_t i = 0; i < llrs.size(); ++i) out[p[i]] = llrs[i];
    return out;
}

FrameLayout make_layout(const FrameConfig& cfg, Rng& rng) {
    FrameLayout lay;
    const int n = cfg.n_subcarriers;
    lay.is_pilot.assign(n, 0);
    lay.is_training.assign(n, 0);

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < cfg.n_pilots; ++i) {
        std::uniform_int_distribution<int> d(i, n - 1);
        std::swap(idx[i], idx[d(rng)]);
    }
    lay.pilot_carriers.assign(idx.begin(), idx.begin() + cfg.n_pilots);
    std::sort(lay.pilot_carriers.begin(), lay.pilot_carriers.end());
    for (int i : lay.pilot_carriers) lay.is_pilot[i] = 1;

    for (int i = 0; i < n; ++i)
        if (!lay.is_pilot[i]) lay.data_carriers.push_back(i);

    const int nd = static_cast<int>(lay.data_carriers.size());
    for (int t = 0; t < cfg.n_training; ++t) {
        const int pos = lay.data_carriers[static_cast<int>(std::int64_t(t) * nd / cfg.n_training)];
        lay.is_training[pos] = 1;
    }

    for (int i : lay.data_carriers)
        for (int m = 0; m < cfg.bits_per_symbol; ++m) {
            if (m == 0 && lay.is_training[i]) continue;
            lay.coded_slots.emplace_back(i, m);
        }
    if (static_cast<int>(lay.coded_slots.size()) != cfg.data_bits())
        throw std::logic_error("frame: coded slot count mismatch");
    return lay;
}

Frame assemble_frame(std::span<const std::uint8_t> coded_bits, const FrameConfig& cfg,
                     const Constellation& constellation, Rng& rng) {
    cfg.validate();
    if (static_cast<int>(coded_bits.size()) != cfg.coded_bits())
        throw std::invalid_argument("frame: coded bit count must be Md*Q");
    if (constellation.bits_per_symbol != cfg.bits_per_symbol)
        throw std::invalid_argument("frame: constellation/config mismatch");

    Frame f;
    f.cfg = cfg;
    f.layout = make_layout(cfg, rng);

    const int md = cfg.data_bits();
    std::uniform_int_distribution<int> pilot_draw(0, constellation.size() - 1);
    for (int q = 0; q < cfg.n_ofdm_symbols; ++q) {
        std::vector<int> plabels(cfg.n_pilots);
        for (auto& k : plabels) k = pilot_draw(rng);

        std::vector<cplx> s(cfg.n_subcarriers, cplx(0.0, 0.0));
        for (std::size_t p = 0; p < plabels.size(); ++p)
            s[f.layout.pilot_carriers[p]] = constellation.points[plabels[p]];

        std::vector<std::uint8_t> placed(coded_bits.begin() + std::size_t(q) * md,
                                         coded_bits.begin() + std::size_t(q + 1) * md);
        // Per data subcarrier, build the label: training MSB = 1, rest coded.
        std::vector<int> label(cfg.n_subcarriers, 0);
        for (int i : f.layout.data_carriers)
            if (f.layout.is_training[i]) label[i] = constellation.with_bit(label[i], 0, 1);
        for (int p = 0; p < md; ++p) {
            const auto [i, m] = f.layout.coded_slots[p];
            label[i] = constellation.with_bit(label[i], m, placed[p]);
        }
        for (int i : f.layout.data_carriers) s[i] = constellation.points[label[i]];

        f.pilot_labels.push_back(std::move(plabels));
        f.symbols.push_back(std::move(s));
        f.placed_bits.push_back(std::move(placed));
    }
    return f;
}

std::vector<cplx> subcarrier_gains(std::span<const cplx> taps, int n_subcarriers) {
    if (static_cast<int>(taps.size()) > n_subcarriers)
        throw std::invalid_argument("subcarrier_gains: L > N");
    return dft_apply(taps, n_subcarriers);
}

std::vector<cplx> observe(std::span<const cplx> symbols, std::span<const cplx> gains,
                          double noise_var, Rng& rng) {
    if (symbols.size() != gains.size())
        throw std::invalid_argument("observe: symbol/gain length mismatch");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma = std::sqrt(noise_var / 2.0);
    std::vector<cplx> y(symbols.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const cplx w(sigma * gauss(rng), sigma * gauss(rng));
        y[i] = symbols[i] * gains[i] + w;
    }
    return y;
}

}  // namespace jced
