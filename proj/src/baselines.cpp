#include "jced/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jced {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kVarFloor = 1e-12;

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

// Phi_ij = exp(-2*pi*i*ij/N), N x L.
MatC dft_matrix(int n, int l) {
    MatC phi(n, l);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < l; ++j)
            phi(i, j) = std::polar(1.0, -2.0 * kPi * double(i) * double(j) / double(n));
    return phi;
}

// diag(Phi S Phi^H) for Hermitian S (L x L): sum the diagonals of S and take
// a length-N DFT of the folded diagonal sums.
std::vector<double> diag_phi_s_phih(const MatC& s, int n) {
    const int l = static_cast<int>(s.rows());
    std::vector<cplx> acc(n, cplx(0.0, 0.0));
    for (int j = 0; j < l; ++j)
        for (int j2 = 0; j2 < l; ++j2) acc[((j - j2) % n + n) % n] += s(j, j2);
    const auto d = dft_apply(acc, n);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = std::max(d[i].real(), 0.0);
    return out;
}

}  // namespace

std::vector<cplx> WhitenedModel::row_gain() const {
    std::vector<cplx> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = s_hat[i] / std::sqrt(nu_v[i]);
    return g;
}

std::vector<cplx> WhitenedModel::apply(std::span<const cplx> x) const {
    auto z = dft_apply(x, u.size());
    const auto g = row_gain();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= g[i];
    return z;
}

std::vector<cplx> WhitenedModel::apply_adjoint(std::span<const cplx> v) const {
    const auto g = row_gain();
    std::vector<cplx> w(v.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::conj(g[i]) * v[i];
    return dft_adjoint(w, n_taps);
}

WhitenedModel whiten(std::span<const cplx> y, std::span<const cplx> s_hat,
                     std::span<const double> nu_s, std::span<const double> rho,
                     double noise_var) {
    if (y.size() != s_hat.size() || y.size() != nu_s.size())
        throw std::invalid_argument("whiten: shape mismatch");
    WhitenedModel m;
    m.n_taps = static_cast<int>(rho.size());
    m.rho.assign(rho.begin(), rho.end());
    m.s_hat.assign(s_hat.begin(), s_hat.end());
    double rho_sum = 0.0;
    for (double r : rho) rho_sum += r;
    m.nu_v.resize(y.size());
    m.u.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        m.nu_v[i] = std::max(noise_var + rho_sum * nu_s[i], kVarFloor);
        m.u[i] = y[i] / std::sqrt(m.nu_v[i]);
    }
    return m;
}

LinearEstimate lmmse_equalize(const WhitenedModel& model) {
    const int n = static_cast<int>(model.u.size());
    const int l = model.n_taps;
    const auto g = model.row_gain();

    // A Diag(rho) A^H is Diag(g) T Diag(g)^H with T Toeplitz from the DFT of
    // the PDP; build it in O(N^2).
    const std::vector<cplx> rho_c(model.rho.begin(), model.rho.end());
    const auto t = dft_apply(rho_c, n);
    MatC gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int i2 = 0; i2 < n; ++i2)
            gram(i, i2) = g[i] * std::conj(g[i2]) * t[((i - i2) % n + n) % n];
    gram.diagonal().array() += 1.0;

    LinearEstimate est;
    Eigen::LLT<MatC> llt(gram);
    if (llt.info() != Eigen::Success) {
        gram.diagonal().array() += 1e-9;
        llt.compute(gram);
        est.solver_retried = true;
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("lmmse: Cholesky failed after ridge retry");
    }

    const VecC u = Eigen::Map<const VecC>(model.u.data(), n);
    const VecC w = llt.solve(u);
    auto xh = dft_adjoint(std::span<const cplx>(w.data(), std::size_t(n)), l);
    for (int j = 0; j < l; ++j) xh[j] *= model.rho[j];
    est.xhat = std::move(xh);
    est.zhat = dft_apply(est.xhat, n);

    // Posterior covariance congruence: Sigma = Diag(rho) - M1^H G^-1 M1 with
    // M1 = A Diag(rho); nu_z = diag(Phi Sigma Phi^H).
    MatC m1 = dft_matrix(n, l);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < l; ++j) m1(i, j) *= g[i] * model.rho[j];
    const MatC b = llt.solve(m1);
    MatC sigma = -(m1.adjoint() * b);
    for (int j = 0; j < l; ++j) sigma(j, j) += model.rho[j];
    est.nu_z = diag_phi_s_phih(sigma, n);
    return est;
}

namespace {

// Complex soft threshold.
cplx soft(cplx v, double t) {
    const double mag = std::abs(v);
    if (mag <= t) return cplx(0.0, 0.0);
    return v * ((mag - t) / mag);
}

double operator_norm_sq(const WhitenedModel& model) {
    // Power iteration on A^H A with a deterministic start; v kept unit norm.
    std::vector<cplx> v(model.n_taps);
    double vn = 0.0;
    for (int j = 0; j < model.n_taps; ++j) {
        v[j] = cplx(1.0 + 1e-3 * j, 1e-3 * (j % 7));
        vn += std::norm(v[j]);
    }
    vn = std::sqrt(vn);
    for (auto& c : v) c /= vn;
    double lam = 1.0;
    for (int it = 0; it < 25; ++it) {
        auto w = model.apply_adjoint(model.apply(v));
        double nrm = 0.0;
        for (const auto& c : w) nrm += std::norm(c);
        nrm = std::sqrt(nrm);
        if (nrm <= 0.0) return 1.0;
        lam = nrm;  // ||A^H A v|| with ||v|| = 1
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = w[j] / nrm;
    }
    return lam * 1.02;
}

struct FistaOutcome {
    std::vector<cplx> x;
    double resid_per_row = 0.0;  // ||u - A x||^2 / active rows
};

FistaOutcome fista_penalized(const WhitenedModel& model, double mu, double lip, int active_rows,
                             std::vector<cplx> x0, int max_iters) {
    const std::size_t l = x0.size();
    std::vector<cplx> x = std::move(x0), xz(l), y_pt = x, diff(l);
    double t_mom = 1.0;

    auto objective = [&](const std::vector<cplx>& xx, double& resid2) {
        const auto ax = model.apply(xx);
        resid2 = 0.0;
        for (std::size_t i = 0; i < ax.size(); ++i) resid2 += std::norm(model.u[i] - ax[i]);
        double l1 = 0.0;
        for (const auto& c : xx) l1 += std::abs(c);
        return 0.5 * resid2 + mu * l1;
    };

    double resid2_x = 0.0;
    double f_x = objective(x, resid2_x);
    for (int it = 0; it < max_iters; ++it) {
        const auto ay = model.apply(y_pt);
        static thread_local std::vector<cplx> r;
        r.resize(ay.size());
        for (std::size_t i = 0; i < ay.size(); ++i) r[i] = ay[i] - model.u[i];
        const auto grad = model.apply_adjoint(r);
        for (std::size_t j = 0; j < l; ++j) xz[j] = soft(y_pt[j] - grad[j] / lip, mu / lip);

        double resid2_z = 0.0;
        const double f_z = objective(xz, resid2_z);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        double step = 0.0;
        if (f_z <= f_x) {  // monotone acceptance
            for (std::size_t j = 0; j < l; ++j) {
                diff[j] = xz[j] - x[j];
                step += std::norm(diff[j]);
                y_pt[j] = xz[j] + (t_mom - 1.0) / t_next * diff[j];
            }
            x = xz;
            f_x = f_z;
            resid2_x = resid2_z;
        } else {  // keep x, restart momentum toward the prox point
            for (std::size_t j = 0; j < l; ++j) {
                step += std::norm(xz[j] - x[j]);
                y_pt[j] = x[j] + (t_mom / t_next) * (xz[j] - x[j]);
            }
        }
        t_mom = t_next;
        double xn = 0.0;
        for (const auto& c : x) xn += std::norm(c);
        if (step <= 1e-16 * std::max(1.0, xn)) break;
    }
    FistaOutcome out;
    out.x = std::move(x);
    out.resid_per_row = resid2_x / std::max(active_rows, 1);
    return out;
}

}  // namespace

LassoEstimate lasso_equalize(const WhitenedModel& model, std::span<const cplx> true_x,
                             const LassoOptions& opts) {
    const int l = model.n_taps;
    const int active = model.active_rows > 0 ? model.active_rows
                                             : static_cast<int>(model.u.size());
    double u2 = 0.0;
    for (const auto& c : model.u) u2 += std::norm(c);
    const double resid_empty = u2 / active;

    const auto atu = model.apply_adjoint(model.u);
    double mu_max = 0.0;
    for (const auto& c : atu) mu_max = std::max(mu_max, std::abs(c));
    const double lip = operator_norm_sq(model);

    LassoEstimate best;
    double best_mse = std::numeric_limits<double>::infinity();
    for (double target : opts.residual_targets) {
        std::vector<cplx> x(l, cplx(0.0, 0.0));
        bool converged = true;
        if (resid_empty > target && mu_max > 0.0) {
            // Bisect log(mu); residual grows with mu. Warm-start across steps.
            double lo = std::log(mu_max * 1e-6), hi = std::log(mu_max);
            double best_gap = std::numeric_limits<double>::infinity();
            std::vector<cplx> best_x = x;
            converged = false;
            for (int it = 0; it < opts.max_bisect_iters; ++it) {
                const double mid = 0.5 * (lo + hi);
                auto sol = fista_penalized(model, std::exp(mid), lip, active, x,
                                           opts.max_fista_iters);
                x = sol.x;
                const double gap = std::abs(sol.resid_per_row - target);
                if (gap < best_gap) {
                    best_gap = gap;
                    best_x = x;
                }
                if (gap <= opts.target_tol * target) {
                    converged = true;
                    break;
                }
                (sol.resid_per_row > target ? hi : lo) = mid;
            }
            x = best_x;
        }
        double mse = 0.0;
        for (int j = 0; j < l; ++j) mse += std::norm(true_x[j] - x[j]);
        mse /= double(l);
        if (mse < best_mse) {
            best_mse = mse;
            best.xhat = std::move(x);
            best.nu_x = mse;
            best.chosen_target = target;
            best.converged = converged;
        }
    }
    best.zhat = dft_apply(best.xhat, model.u.size());
    best.nu_z.assign(model.u.size(), double(l) * best.nu_x);
    return best;
}

std::vector<cplx> bsg_bound(std::span<const cplx> y, std::span<const cplx> true_symbols,
                            std::span<const std::uint8_t> true_states,
                            std::span<const double> nu0, std::span<const double> nu1,
                            double noise_var) {
    const int n = static_cast<int>(y.size());
    const int l = static_cast<int>(true_states.size());
    std::vector<cplx> v(l);
    for (int j = 0; j < l; ++j) v[j] = cplx(true_states[j] ? nu1[j] : nu0[j], 0.0);

    const auto t = dft_apply(v, n);
    MatC gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int i2 = 0; i2 < n; ++i2)
            gram(i, i2) =
                true_symbols[i] * std::conj(true_symbols[i2]) * t[((i - i2) % n + n) % n];
    gram.diagonal().array() += std::max(noise_var, kVarFloor);

    Eigen::LLT<MatC> llt(gram);
    if (llt.info() != Eigen::Success) {
        gram.diagonal().array() += 1e-9;
        llt.compute(gram);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("bsg: Cholesky failed after ridge retry");
    }
    const VecC yv = Eigen::Map<const VecC>(y.data(), n);
    const VecC w = llt.solve(yv);
    std::vector<cplx> ws(n);
    for (int i = 0; i < n; ++i) ws[i] = std::conj(true_symbols[i]) * w[i];
    auto xh = dft_adjoint(ws, l);
    for (int j = 0; j < l; ++j) xh[j] *= v[j].real();
    return xh;
}

LmmseEqualizer::LmmseEqualizer(std::vector<double> rho, const Constellation& constellation,
                               double noise_var)
    : rho_(std::move(rho)), constellation_(constellation), noise_var_(noise_var) {}

EqualizerOutput LmmseEqualizer::equalize(int q, std::span<const cplx> y,
                                         const std::vector<std::vector<double>>& log_beta,
                                         int turbo_iter) {
    (void)q;
    (void)turbo_iter;
    const std::size_t n = y.size();
    std::vector<cplx> s_hat(n);
    std::vector<double> nu_s(n);
    for (std::size_t i = 0; i < n; ++i)
        soft_symbol_moments(log_beta[i], constellation_, s_hat[i], nu_s[i]);

    EqualizerOutput out;
    try {
        const auto model = whiten(y, s_hat, nu_s, rho_, noise_var_);
        auto est = lmmse_equalize(model);
        out.zhat = std::move(est.zhat);
        out.nu_z = std::move(est.nu_z);
        out.xhat = std::move(est.xhat);
    } catch (const std::exception& e) {
        out.failed = true;
        out.failure = e.what();
    }
    out.inner_iters = 1;
    return out;
}

LassoEqualizer::LassoEqualizer(std::vector<double> rho, const Constellation& constellation,
                               double noise_var, const Frame& frame,
                               std::vector<std::vector<cplx>> true_taps, LassoOptions opts)
    : rho_(std::move(rho)),
      constellation_(constellation),
      noise_var_(noise_var),
      frame_(frame),
      true_taps_(std::move(true_taps)),
      opts_(std::move(opts)),
      best_mse_(frame.cfg.n_ofdm_symbols, std::numeric_limits<double>::infinity()),
      frozen_(frame.cfg.n_ofdm_symbols) {}

EqualizerOutput LassoEqualizer::equalize(int q, std::span<const cplx> y,
                                         const std::vector<std::vector<double>>& log_beta,
                                         int turbo_iter) {
    const std::size_t n = y.size();
    std::vector<cplx> s_hat(n);
    std::vector<double> nu_s(n);
    for (std::size_t i = 0; i < n; ++i)
        soft_symbol_moments(log_beta[i], constellation_, s_hat[i], nu_s[i]);

    const bool pilots_only = turbo_iter == 1 && frame_.cfg.n_pilots > 0;
    std::vector<cplx> y_use(y.begin(), y.end());
    if (pilots_only) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!frame_.layout.is_pilot[i]) {
                s_hat[i] = cplx(0.0, 0.0);  // zero row: excluded from the fit
                nu_s[i] = 0.0;
                y_use[i] = cplx(0.0, 0.0);
            }
        }
    }

    EqualizerOutput out;
    auto model = whiten(y_use, s_hat, nu_s, rho_, noise_var_);
    if (pilots_only) model.active_rows = frame_.cfg.n_pilots;
    auto est = lasso_equalize(model, true_taps_.at(q), opts_);
    out.inner_iters = 1;
    if (est.nu_x < best_mse_[q]) {
        best_mse_[q] = est.nu_x;
        out.zhat = std::move(est.zhat);
        out.nu_z = std::move(est.nu_z);
        out.xhat = std::move(est.xhat);
        if (!est.converged) {
            out.failure = "lasso: residual target not met";
        }
        frozen_[q] = out;
    } else {
        out = frozen_[q];  // genie MSE did not improve: outputs not updated
    }
    return out;
}

}  // namespace jced
