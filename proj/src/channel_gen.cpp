#include "jced/channel_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace jced {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {  // sin(pi x)/(pi x)
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

void SalehValenzuelaParams::validate() const {
    const bool ok = std::isfinite(cluster_rate) && cluster_rate > 0.0 &&
                    std::isfinite(component_rate1) && component_rate1 > 0.0 &&
                    std::isfinite(component_rate2) && component_rate2 > 0.0 &&
                    std::isfinite(mixture_weight) && mixture_weight >= 0.0 &&
                    mixture_weight <= 1.0 && std::isfinite(cluster_decay) &&
                    cluster_decay > 0.0 && std::isfinite(intra_cluster_decay) &&
                    intra_cluster_decay > 0.0 && std::isfinite(nakagami_mean) &&
                    std::isfinite(nakagami_std) && nakagami_std >= 0.0 &&
                    std::isfinite(mean_cluster_count) && mean_cluster_count > 0.0 &&
                    components_per_cluster >= 1 && sync_offset_lags >= 0 &&
                    std::isfinite(sync_rate) && sync_rate > 0.0 &&
                    std::isfinite(amplitude_scale) && amplitude_scale > 0.0;
    if (!ok) throw std::invalid_argument("saleh-valenzuela: invalid parameters");
}

SalehValenzuelaParams SalehValenzuelaParams::from_config(const Config& cfg) {
    const double ns = 1e-9;
    SalehValenzuelaParams p;
    p.cluster_rate = cfg.get_double("sv_cluster_rate_per_ns") / ns;
    p.component_rate1 = cfg.get_double("sv_component_rate1_per_ns") / ns;
    p.component_rate2 = cfg.get_double("sv_component_rate2_per_ns") / ns;
    p.mixture_weight = cfg.get_double("sv_mixture_weight");
    p.cluster_decay = cfg.get_double("sv_cluster_decay_ns") * ns;
    p.intra_cluster_decay = cfg.get_double("sv_intra_cluster_decay_ns") * ns;
    p.nakagami_mean = cfg.get_double("sv_nakagami_mean");
    p.nakagami_std = cfg.get_double("sv_nakagami_std");
    p.mean_cluster_count = cfg.get_double("sv_mean_cluster_count");
    p.components_per_cluster = static_cast<int>(cfg.get_int("sv_components_per_cluster", 100));
    p.sync_offset_lags = static_cast<int>(cfg.get_int("sv_sync_offset_lags", 20));
    const double baud_ns = cfg.get_double("baud_ns");
    p.sync_rate = cfg.get_double("sv_sync_rate_per_ns", 1.0 / baud_ns) / ns;
    p.amplitude_scale = cfg.get_double("sv_amplitude_scale", 1.0);
    p.validate();
    return p;
}

void PulsePair::validate() const {
    if (!(rolloff > 0.0 && rolloff <= 1.0))
        throw std::invalid_argument("pulse: roll-off must be in (0,1]");
    if (!(baud_interval > 0.0)) throw std::invalid_argument("pulse: baud interval must be positive");
    if (truncation_halfwidth < 1) throw std::invalid_argument("pulse: truncation halfwidth < 1");
}

double PulsePair::srrc(double t) const {
    const double T = baud_interval;
    if (std::abs(t) > truncation_halfwidth * T) return 0.0;
    const double a = rolloff;
    const double u = t / T;
    const double denom_root = 4.0 * a * u;
    if (std::abs(u) < 1e-10) return (1.0 - a + 4.0 * a / kPi) / std::sqrt(T);
    if (std::abs(std::abs(denom_root) - 1.0) < 1e-8) {
        // t = +|- T/(4a)
        const double c = a / std::sqrt(2.0 * T);
        return c * ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * a)) +
                    (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * a)));
    }
    const double num = std::sin(kPi * u * (1.0 - a)) + denom_root * std::cos(kPi * u * (1.0 + a));
    const double den = kPi * u * (1.0 - denom_root * denom_root);
    return num / den / std::sqrt(T);
}

double PulsePair::raised_cosine(double t) const {
    const double T = baud_interval;
    if (std::abs(t) > 2.0 * truncation_halfwidth * T) return 0.0;
    const double a = rolloff;
    const double u = t / T;
    const double q = 2.0 * a * u;
    if (std::abs(std::abs(q) - 1.0) < 1e-8) return (kPi / 4.0) * sinc(1.0 / (2.0 * a));
    return sinc(u) * std::cos(kPi * a * u) / (1.0 - q * q);
}

std::vector<double> PulsePair::sampled_srrc(int oversample) const {
    validate();
    if (oversample < 1) throw std::invalid_argument("pulse: oversample < 1");
    const double dt = baud_interval / oversample;
    const int half = truncation_halfwidth * oversample;
    std::vector<double> g(2 * half + 1);
    double energy = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = srrc(i * dt);
        g[i + half] = v;
        energy += v * v * dt;
    }
    const double scale = 1.0 / std::sqrt(energy);
    for (auto& v : g) v *= scale;
    return g;
}

PathList generate_impulse_response(const SalehValenzuelaParams& p, Rng& rng) {
    p.validate();

    std::poisson_distribution<int> cluster_count(p.mean_cluster_count);
    int n_clusters = 0;
    do {
        n_clusters = cluster_count(rng);
    } while (n_clusters < 1);

    std::exponential_distribution<double> sync_delay(p.sync_rate);
    std::exponential_distribution<double> cluster_gap(p.cluster_rate);
    std::exponential_distribution<double> comp_gap1(p.component_rate1);
    std::exponential_distribution<double> comp_gap2(p.component_rate2);
    std::bernoulli_distribution pick_first(p.mixture_weight);
    std::normal_distribution<double> m_draw(p.nakagami_mean, p.nakagami_std);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

    const double t0 = p.sync_offset_lags / p.sync_rate + sync_delay(rng);
    const double energy_norm =
        p.intra_cluster_decay * ((1.0 - p.mixture_weight) * p.component_rate1 +
                                 p.mixture_weight * p.component_rate2 + 1.0);

    PathList out;
    out.delays.reserve(std::size_t(n_clusters) * p.components_per_cluster);
    out.amps.reserve(out.delays.capacity());

    double cluster_delay = t0;
    for (int c = 0; c < n_clusters; ++c) {
        if (c > 0) cluster_delay += cluster_gap(rng);
        double tau = 0.0;
        for (int k = 0; k < p.components_per_cluster; ++k) {
            if (k > 0) tau += pick_first(rng) ? comp_gap1(rng) : comp_gap2(rng);
            const double mean_energy =
                std::exp(-cluster_delay / p.cluster_decay - tau / p.intra_cluster_decay) /
                energy_norm;
            const double m = std::max(0.5, m_draw(rng));
            // |h|^2 ~ Gamma(m, mean_energy/m) gives a Nakagami-m amplitude.
            std::gamma_distribution<double> power(m, mean_energy / m);
            const double amp = std::sqrt(power(rng)) * p.amplitude_scale;
            const double ph = phase(rng);
            out.delays.push_back(cluster_delay + tau);
            out.amps.push_back(amp * cplx(std::cos(ph), std::sin(ph)));
        }
    }
    return out;
}

TapVector sample_taps(const PathList& paths, const PulsePair& pulses, int n_taps,
                      bool* truncated_energy_warn) {
    pulses.validate();
    if (n_taps < 1) throw std::invalid_argument("sample_taps: L < 1");
    const double T = pulses.baud_interval;
    const int support = 2 * pulses.truncation_halfwidth;  // rc support in baud

    // Extended range catches energy that lands beyond lag L-1.
    int l_ext = n_taps;
    for (double d : paths.delays)
        l_ext = std::max(l_ext, static_cast<int>(std::ceil(d / T)) + support + 1);
    std::vector<cplx> ext(l_ext, cplx(0.0, 0.0));

    for (std::size_t pidx = 0; pidx < paths.delays.size(); ++pidx) {
        const double d = paths.delays[pidx];
        const cplx a = paths.amps[pidx];
        const int j_lo = std::max(0, static_cast<int>(std::ceil(d / T)) - support);
        const int j_hi = std::min(l_ext - 1, static_cast<int>(std::floor(d / T)) + support);
        for (int j = j_lo; j <= j_hi; ++j) ext[j] += a * pulses.raised_cosine(j * T - d);
    }

    double total = 0.0, tail = 0.0;
    for (int j = 0; j < l_ext; ++j) {
        const double e = std::norm(ext[j]);
        total += e;
        if (j >= n_taps) tail += e;
    }
    const bool warn = total > 0.0 && tail > 0.01 * total;
    if (truncated_energy_warn) {
        *truncated_energy_warn = warn;
    } else if (warn) {
        std::fprintf(stderr, "sample_taps: %.2f%% of pulse-shaped energy beyond lag %d\n",
                     100.0 * tail / total, n_taps);
    }

    TapVector tv;
    tv.taps.assign(ext.begin(), ext.begin() + n_taps);
    return tv;
}

std::vector<double> estimate_pdp(std::span<const TapVector> realizations) {
    if (realizations.empty()) throw std::invalid_argument("estimate_pdp: no realizations");
    const std::size_t l = realizations[0].taps.size();
    std::vector<double> rho(l, 0.0);
    for (const auto& r : realizations) {
        if (r.taps.size() != l) throw std::invalid_argument("estimate_pdp: ragged realizations");
        for (std::size_t j = 0; j < l; ++j) rho[j] += std::norm(r.taps[j]);
    }
    for (auto& v : rho) v /= double(realizations.size());
    return rho;
}

void dump_taps(const std::string& path, std::span<const TapVector> realizations) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_taps: cannot open " + path);
    const std::uint32_t l = realizations.empty() ? 0 : std::uint32_t(realizations[0].taps.size());
    const std::uint32_t count = std::uint32_t(realizations.size());
    out.write(reinterpret_cast<const char*>(&l), 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& r : realizations) {
        if (r.taps.size() != l) throw std::invalid_argument("dump_taps: ragged realizations");
        for (const cplx& t : r.taps) {
            const float re = static_cast<float>(t.real());
            const float im = static_cast<float>(t.imag());
            out.write(reinterpret_cast<const char*>(&re), 4);
            out.write(reinterpret_cast<const char*>(&im), 4);
        }
    }
    if (!out) throw std::runtime_error("dump_taps: write failed for " + path);
}

std::vector<TapVector> load_taps(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_taps: cannot open " + path);
    std::uint32_t l = 0, count = 0;
    in.read(reinterpret_cast<char*>(&l), 4);
    in.read(reinterpret_cast<char*>(&count), 4);
    std::vector<TapVector> out(count);
    for (auto& r : out) {
        r.taps.resize(l);
        for (auto& t : r.taps) {
            float re = 0.0f, im = 0.0f;
            in.read(reinterpret_cast<char*>(&re), 4);
            in.read(reinterpret_cast<char*>(&im), 4);
            t = cplx(re, im);
        }
    }
    if (!in) throw std::runtime_error("load_taps: truncated file " + path);
    return out;
}

}  // namespace jced
