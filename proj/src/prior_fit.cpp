#include "jced/prior_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jced {

namespace {

constexpr double kPi = std::numbers::pi;

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double log_mix_likelihood(double energy, double lam, double v0, double v1) {
    // log[(1-lam) CN(x;0,v0) + lam CN(x;0,v1)] as a function of |x|^2
    const double a = (lam < 1.0) ? std::log1p(-lam) - std::log(kPi * v0) - energy / v0
                                 : -std::numeric_limits<double>::infinity();
    const double b = (lam > 0.0) ? std::log(lam) - std::log(kPi * v1) - energy / v1
                                 : -std::numeric_limits<double>::infinity();
    const double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

}  // namespace

EmFitResult em_fit_gm2(std::span<const TapVector> realizations, const Gm2HmmPrior& init,
                       const EmFitOptions& opts) {
    if (realizations.empty()) throw std::invalid_argument("em_fit_gm2: no realizations");
    const std::size_t l = realizations[0].taps.size();
    const std::size_t u_count = realizations.size();

    auto init_at = [&](const std::vector<double>& v, std::size_t j, double fallback) {
        if (v.empty()) return fallback;
        return v.size() == 1 ? v[0] : v.at(j);
    };

    EmFitResult res;
    res.lambda.resize(l);
    res.nu0.resize(l);
    res.nu1.resize(l);
    res.omega.assign(l, std::vector<double>(u_count, 0.0));
    res.iters.resize(l);
    res.degenerate.assign(l, 0);
    res.loglik_trace.resize(l);

    std::vector<double> energy(u_count);
    for (std::size_t j = 0; j < l; ++j) {
        double mean_e = 0.0;
        for (std::size_t u = 0; u < u_count; ++u) {
            if (realizations[u].taps.size() != l)
                throw std::invalid_argument("em_fit_gm2: ragged realizations");
            energy[u] = std::norm(realizations[u].taps[j]);
            mean_e += energy[u];
        }
        mean_e /= double(u_count);

        if (mean_e <= 0.0) {
            res.lambda[j] = 0.0;
            res.nu0[j] = opts.variance_floor;
            res.nu1[j] = opts.variance_floor * 10.0;
            res.degenerate[j] = 1;
            res.iters[j] = 0;
            continue;
        }

        double lam = init_at(init.lambda, j, 0.5);
        double v1 = std::max(init_at(init.nu1, j, 2.0 * mean_e), opts.variance_floor);
        double v0 = std::max(init_at(init.nu0, j, 0.02 * mean_e), opts.variance_floor);

        auto posteriors = [&](double la, double w0, double w1) {
            const double bias = (la <= 0.0)   ? -std::numeric_limits<double>::infinity()
                                : (la >= 1.0) ? std::numeric_limits<double>::infinity()
                                              : std::log(la / (1.0 - la));
            const double slope = 1.0 / w0 - 1.0 / w1;
            const double ratio = std::log(w0 / w1);
            for (std::size_t u = 0; u < u_count; ++u) {
                if (!std::isfinite(bias))
                    res.omega[j][u] = bias > 0.0 ? 1.0 : 0.0;
                else
                    res.omega[j][u] = sigmoid(bias + ratio + energy[u] * slope);
            }
        };

        int it = 0;
        while (it < opts.max_iters) {
            posteriors(lam, v0, v1);
            double loglik = 0.0;
            double sum_w = 0.0, sum_we = 0.0, sum_e = 0.0;
            for (std::size_t u = 0; u < u_count; ++u) {
                const double w = res.omega[j][u];
                sum_w += w;
                sum_we += w * energy[u];
                sum_e += energy[u];
                loglik += log_mix_likelihood(energy[u], lam, v0, v1);
            }
            res.loglik_trace[j].push_back(loglik);

            const double new_v1 = sum_w > 0.0 ? std::max(sum_we / sum_w, opts.variance_floor) : v1;
            const double sum_w0 = double(u_count) - sum_w;
            const double new_v0 =
                sum_w0 > 0.0 ? std::max((sum_e - sum_we) / sum_w0, opts.variance_floor) : v0;
            const double new_lam = sum_w / double(u_count);

            const double delta = std::max({std::abs(new_lam - lam), std::abs(new_v0 - v0),
                                           std::abs(new_v1 - v1)});
            lam = new_lam;
            v0 = new_v0;
            v1 = new_v1;
            ++it;
            if (!(delta >= opts.tol)) break;  // also exits on tol = inf after one step
        }
        res.iters[j] = it;

        // Leave omega consistent with the returned parameters.
        posteriors(lam, v0, v1);
        if (v0 > v1) {  // label-swap guard
            std::swap(v0, v1);
            lam = 1.0 - lam;
            for (auto& w : res.omega[j]) w = 1.0 - w;
        }
        if (v1 <= v0) v1 = v0 * 1.01 + opts.variance_floor;
        res.lambda[j] = lam;
        res.nu0[j] = v0;
        res.nu1[j] = v1;
    }
    return res;
}

std::vector<std::vector<std::uint8_t>> map_states(const std::vector<std::vector<double>>& omega) {
    std::vector<std::vector<std::uint8_t>> d(omega.size());
    for (std::size_t j = 0; j < omega.size(); ++j) {
        d[j].resize(omega[j].size());
        for (std::size_t u = 0; u < omega[j].size(); ++u)
            d[j][u] = omega[j][u] >= 0.5 ? 1 : 0;
    }
    return d;
}

SwitchingEstimate estimate_switching_probs(const std::vector<std::vector<double>>& omega) {
    if (omega.empty() || omega[0].empty())
        throw std::invalid_argument("estimate_switching_probs: empty table");
    const std::size_t l = omega.size();
    const std::size_t u_count = omega[0].size();
    const auto d = map_states(omega);

    SwitchingEstimate est;
    est.p01.assign(l, -1.0);
    est.p10.assign(l, -1.0);
    est.p01_flagged.assign(l, 0);
    est.p10_flagged.assign(l, 0);

    for (std::size_t j = 0; j + 1 < l; ++j) {
        std::size_t n1 = 0, n0 = 0, n10 = 0, n01 = 0;
        for (std::size_t u = 0; u < u_count; ++u) {
            if (d[j][u]) {
                ++n1;
                if (!d[j + 1][u]) ++n10;  // 1 -> 0 transition
            } else {
                ++n0;
                if (d[j + 1][u]) ++n01;  // 0 -> 1 transition
            }
        }
        if (n1 > 0)
            est.p01[j] = double(n10) / double(n1);
        else
            est.p01_flagged[j] = 1;
        if (n0 > 0)
            est.p10[j] = double(n01) / double(n0);
        else
            est.p10_flagged[j] = 1;
    }
    if (l >= 2) {
        est.p01_flagged[l - 1] = 1;
        est.p10_flagged[l - 1] = 1;
    }

    // Fill flagged entries from the nearest estimated lag (left first).
    auto fill = [&](std::vector<double>& p, std::vector<std::uint8_t>& flag) {
        double last = -1.0;
        for (std::size_t j = 0; j < l; ++j) {
            if (p[j] >= 0.0)
                last = p[j];
            else if (last >= 0.0)
                p[j] = last;
        }
        double next = -1.0;
        for (std::size_t j = l; j-- > 0;) {
            if (!flag[j] && p[j] >= 0.0) next = p[j];
            if (p[j] < 0.0) p[j] = next >= 0.0 ? next : 0.5;
        }
    };
    fill(est.p01, est.p01_flagged);
    fill(est.p10, est.p10_flagged);
    return est;
}

ConditionalCorrelation conditional_correlation(
    std::span<const TapVector> realizations,
    const std::vector<std::vector<std::uint8_t>>& states) {
    if (realizations.empty()) throw std::invalid_argument("conditional_correlation: no data");
    const std::size_t l = realizations[0].taps.size();
    const std::size_t u_count = realizations.size();
    if (states.size() != l || states[0].size() != u_count)
        throw std::invalid_argument("conditional_correlation: state table shape mismatch");

    ConditionalCorrelation cc;
    cc.value.assign(l >= 1 ? l - 1 : 0, std::complex<double>(0.0, 0.0));
    cc.insufficient.assign(cc.value.size(), 0);
    for (std::size_t j = 0; j + 1 < l; ++j) {
        std::complex<double> num(0.0, 0.0);
        double e_next = 0.0, e_cur = 0.0;
        std::size_t pairs = 0;
        for (std::size_t u = 0; u < u_count; ++u) {
            if (!(states[j][u] && states[j + 1][u])) continue;
            ++pairs;
            const cplx a = realizations[u].taps[j + 1];
            const cplx b = realizations[u].taps[j];
            num += a * std::conj(b);
            e_next += std::norm(a);
            e_cur += std::norm(b);
        }
        if (pairs < 10 || e_next <= 0.0 || e_cur <= 0.0) {
            cc.insufficient[j] = 1;
            continue;
        }
        cc.value[j] = num / std::sqrt(e_next * e_cur);
    }
    return cc;
}

PriorFitReport fit_gm2_hmm_prior(std::span<const TapVector> realizations,
                                 const EmFitOptions& opts) {
    const EmFitResult em = em_fit_gm2(realizations, Gm2HmmPrior{}, opts);
    const SwitchingEstimate sw = estimate_switching_probs(em.omega);

    Gm2HmmPrior p;
    p.lambda = em.lambda;
    p.nu0 = em.nu0;
    p.nu1 = em.nu1;
    p.p01 = sw.p01;
    p.p10 = sw.p10;

    PriorFitReport rep;
    rep.prior = enforce_consistency(p);
    for (std::size_t j = 0; j < p.length(); ++j)
        rep.max_lambda_shift =
            std::max(rep.max_lambda_shift, std::abs(rep.prior.lambda[j] - em.lambda[j]));
    rep.degenerate_lags = em.degenerate;
    rep.prior.validate();
    return rep;
}

}  // namespace jced
