#include "jced/gamp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace jced {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

GoutResult gout_qam(cplx y, cplx p_hat, double nu_z, std::span<const double> log_beta,
                    const Constellation& constellation, double noise_var,
                    std::span<double> log_xi, double clip) {
    const int k_count = constellation.size();
    if (static_cast<int>(log_beta.size()) != k_count || static_cast<int>(log_xi.size()) != k_count)
        throw std::invalid_argument("gout_qam: pmf size mismatch");
    if (!(nu_z > 0.0) || noise_var < 0.0) throw std::invalid_argument("gout_qam: bad variances");

    // Per-symbol Gaussian evidence log CN(y; s p_hat, |s|^2 nu_z + nu_w).
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_count; ++k) {
        const cplx s = constellation.points[k];
        const double v = std::norm(s) * nu_z + noise_var;
        const double le = log_beta[k] - std::log(kPi * v) - std::norm(y - s * p_hat) / v;
        log_xi[k] = le;
        hi = std::max(hi, le);
    }
    double norm = 0.0;
    for (int k = 0; k < k_count; ++k) norm += std::exp(log_xi[k] - hi);
    const double log_norm = hi + std::log(norm);
    for (int k = 0; k < k_count; ++k) log_xi[k] -= log_norm;

    cplx e_mean(0.0, 0.0);
    for (int k = 0; k < k_count; ++k) {
        const cplx s = constellation.points[k];
        const double s2 = std::norm(s);
        const double zeta = s2 * nu_z / (s2 * nu_z + noise_var);
        const cplx e_k = (y / s - p_hat) * zeta;
        e_mean += std::exp(log_xi[k]) * e_k;
    }
    double nu_e = 0.0;
    for (int k = 0; k < k_count; ++k) {
        const cplx s = constellation.points[k];
        const double s2 = std::norm(s);
        const double zeta = s2 * nu_z / (s2 * nu_z + noise_var);
        const cplx e_k = (y / s - p_hat) * zeta;
        nu_e += std::exp(log_xi[k]) * (std::norm(e_k - e_mean) + noise_var * zeta / s2);
    }

    GoutResult r;
    r.nu_e_raw = nu_e;
    const double nu_e_clipped = std::min(nu_e, clip * nu_z);
    r.g = e_mean / nu_z;
    r.gprime = (nu_e_clipped / nu_z - 1.0) / nu_z;
    return r;
}

GinResult gin_gm2(cplx r_hat, double nu_r, double lambda, double nu0, double nu1) {
    if (!(nu_r > 0.0)) throw std::invalid_argument("gin_gm2: nu_r must be positive");
    if (!(nu1 > nu0) || nu0 < 0.0) throw std::invalid_argument("gin_gm2: need nu1 > nu0 >= 0");

    const double v0 = nu0 + nu_r;
    const double v1 = nu1 + nu_r;
    const double r2 = std::norm(r_hat);
    const double gamma0 = nu0 / v0;  // (1 + nu_r/nu0)^-1
    const double gamma1 = nu1 / v1;
    const double log_lext = std::log(v0 / v1) + r2 * (1.0 / v0 - 1.0 / v1);

    double alpha;
    if (lambda <= 0.0)
        alpha = 0.0;
    else if (lambda >= 1.0)
        alpha = 1.0;
    else {
        const double t = std::log(lambda / (1.0 - lambda)) + log_lext;
        alpha = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
    }

    GinResult g;
    g.alpha = alpha;
    g.log_lext = log_lext;
    const double shrink = alpha * gamma1 + (1.0 - alpha) * gamma0;
    g.g = shrink * r_hat;
    const double dg = gamma1 - gamma0;
    g.gprime = alpha * (1.0 - alpha) * dg * dg * r2 / nu_r + shrink;
    return g;
}

GampResult gamp_run(std::span<const cplx> y, const OutputChannelQam& out_ch,
                    const InputChannelGm2& in_ch, const GampOptions& opts) {
    const std::size_t n = y.size();
    const std::size_t l = in_ch.lambda.size();
    if (out_ch.log_beta.size() != n) throw std::invalid_argument("gamp: beta/y size mismatch");
    if (in_ch.nu0.size() != l || in_ch.nu1.size() != l)
        throw std::invalid_argument("gamp: ragged input channel");
    if (l == 0 || n < l) throw std::invalid_argument("gamp: need 0 < L <= N");
    const Constellation& con = *out_ch.constellation;

    GampResult res;
    res.xhat.assign(l, cplx(0.0, 0.0));  // zero-mean prior
    res.nu_x.resize(l);
    double prior_energy = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
        res.nu_x[j] = in_ch.lambda[j] * in_ch.nu1[j] + (1.0 - in_ch.lambda[j]) * in_ch.nu0[j];
        prior_energy += res.nu_x[j];
    }
    prior_energy /= double(l);
    res.log_xi.assign(n, std::vector<double>(con.size(), 0.0));
    res.log_lext.assign(l, 0.0);
    res.alpha.assign(l, 0.0);

    std::vector<cplx> uhat(n, cplx(0.0, 0.0));
    std::vector<double> nu_u(n, 0.0);
    std::vector<cplx> zhat, corr;
    std::vector<cplx> xnew(l);
    std::vector<double> nu_x_new(l);

    const double keep = std::clamp(opts.damping, 0.0, 0.95);
    auto snapshot = [&](int iter, const char* what) {
        res.aborted = true;
        res.abort_reason = std::string(what) + " became non-finite at iteration " +
                           std::to_string(iter) + " (nu_z=" + std::to_string(res.nu_z) + ")";
    };

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        dft_apply(std::span<const cplx>(res.xhat), zhat, n);  // (R1)
        double nu_z = 0.0;                                    // (R2), unit-modulus DFT
        for (std::size_t j = 0; j < l; ++j) nu_z += res.nu_x[j];
        nu_z = std::max(nu_z, 1e-300);
        res.nu_z = nu_z;

        double nu_u_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx p_hat = zhat[i] - nu_z * uhat[i];  // (R3)
            const GoutResult go = gout_qam(y[i], p_hat, nu_z, out_ch.log_beta[i], con,
                                           out_ch.noise_var, res.log_xi[i], opts.clip);
            const cplx u_new = go.g;        // (R4)
            const double nuu = -go.gprime;  // (R5)
            uhat[i] = keep > 0.0 && iter > 1 ? keep * uhat[i] + (1.0 - keep) * u_new : u_new;
            nu_u[i] = nuu;
            nu_u_sum += nuu;
        }
        if (!std::isfinite(nu_u_sum) || nu_u_sum <= 0.0) {
            snapshot(iter, "output-channel variance sum");
            return res;
        }
        const double nu_r = 1.0 / nu_u_sum;  // (R6), unit-modulus DFT

        dft_adjoint(std::span<const cplx>(uhat), corr, l);  // (R7)
        double diff = 0.0;
        for (std::size_t j = 0; j < l; ++j) {
            const cplx r_hat = res.xhat[j] + nu_r * corr[j];
            const GinResult gi =
                gin_gm2(r_hat, nu_r, in_ch.lambda[j], in_ch.nu0[j], in_ch.nu1[j]);
            xnew[j] = gi.g;                  // (R9)
            nu_x_new[j] = nu_r * gi.gprime;  // (R8)
            res.log_lext[j] = gi.log_lext;
            res.alpha[j] = gi.alpha;
            diff += std::norm(xnew[j] - res.xhat[j]);
        }
        diff /= double(l);

        for (std::size_t j = 0; j < l; ++j) {
            if (keep > 0.0 && iter > 1) {
                res.xhat[j] = keep * res.xhat[j] + (1.0 - keep) * xnew[j];
                res.nu_x[j] = keep * res.nu_x[j] + (1.0 - keep) * nu_x_new[j];
            } else {
                res.xhat[j] = xnew[j];
                res.nu_x[j] = nu_x_new[j];
            }
        }
        res.iters = iter;

        bool finite = std::isfinite(diff);
        for (std::size_t j = 0; finite && j < l; ++j)
            finite = std::isfinite(res.nu_x[j]) && std::isfinite(res.xhat[j].real()) &&
                     std::isfinite(res.xhat[j].imag());
        if (!finite) {
            snapshot(iter, "tap state");
            return res;
        }
        if (diff < opts.tol_rel * prior_energy) break;
    }

    // Final (R1)/(R2) so the reported gains match the converged taps.
    dft_apply(std::span<const cplx>(res.xhat), zhat, n);
    res.zhat = zhat;
    double nu_z = 0.0;
    for (std::size_t j = 0; j < l; ++j) nu_z += res.nu_x[j];
    res.nu_z = std::max(nu_z, 1e-300);
    return res;
}

}  // namespace jced
