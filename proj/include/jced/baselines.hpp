#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jced/turbo.hpp"

namespace jced {

// Equivalent white-noise model u = A x + n, cov(n) = I, where
// A = Diag(s_hat / sqrt(nu_v)) Phi and nu_v = nu_w 1 + (1' rho) nu_s.
struct WhitenedModel {
    std::vector<cplx> u;       // length N
    std::vector<cplx> s_hat;   // soft symbol means
    std::vector<double> nu_v;  // pre-whitening noise profile
    std::vector<double> rho;   // tap PDP, length L
    int n_taps = 0;
    int active_rows = 0;       // rows carrying residual budget; 0 means all

    // Row scaling g_i = s_hat_i / sqrt(nu_v_i); A x and A^H v applied via FFT.
    std::vector<cplx> row_gain() const;
    std::vector<cplx> apply(std::span<const cplx> x) const;          // A x
    std::vector<cplx> apply_adjoint(std::span<const cplx> v) const;  // A^H v
};

WhitenedModel whiten(std::span<const cplx> y, std::span<const cplx> s_hat,
                     std::span<const double> nu_s, std::span<const double> rho,
                     double noise_var);

struct LinearEstimate {
    std::vector<cplx> xhat;    // length L
    std::vector<cplx> zhat;    // length N
    std::vector<double> nu_z;  // length N
    bool solver_retried = false;
};

// x = Diag(rho) A^H (A Diag(rho) A^H + I)^{-1} u; posterior gain variances
// from the matching covariance congruence. Singular solves retried with a
// +1e-9 I ridge.
LinearEstimate lmmse_equalize(const WhitenedModel& model);

struct LassoOptions {
    std::vector<double> residual_targets{0.9, 1.5};  // per-sample residual variance
    double target_tol = 0.02;   // +-2% on the met constraint
    int max_fista_iters = 400;
    int max_bisect_iters = 40;
};

struct LassoEstimate {
    std::vector<cplx> xhat;
    std::vector<cplx> zhat;
    std::vector<double> nu_z;   // L * nu_x * 1
    double nu_x = 0.0;          // genie squared error per tap
    double chosen_target = 0.0;
    bool converged = true;
};

// Residual-constrained L1 solve via monotone FISTA on the penalized form with
// a bisection outer loop on the penalty weight; both targets solved, the
// genie keeps the one with the smaller true squared error.
LassoEstimate lasso_equalize(const WhitenedModel& model, std::span<const cplx> true_x,
                             const LassoOptions& opts = {});

// Bit-and-support genie: Gaussian MMSE with the true symbols and the true
// per-lag state variances. Lower-bounds every channel estimator's NMSE.
std::vector<cplx> bsg_bound(std::span<const cplx> y, std::span<const cplx> true_symbols,
                            std::span<const std::uint8_t> true_states,
                            std::span<const double> nu0, std::span<const double> nu1,
                            double noise_var);

// Turbo-scaffold adapters ---------------------------------------------------

class LmmseEqualizer final : public SoftEqualizer {
  public:
    LmmseEqualizer(std::vector<double> rho, const Constellation& constellation, double noise_var);
    EqualizerOutput equalize(int q, std::span<const cplx> y,
                             const std::vector<std::vector<double>>& log_beta,
                             int turbo_iter) override;

  private:
    std::vector<double> rho_;
    const Constellation& constellation_;
    double noise_var_;
};

// Genie-aided SISO-LASSO. First turbo iteration uses pilot rows only when
// pilots are present; outputs freeze whenever the genie MSE stops improving.
class LassoEqualizer final : public SoftEqualizer {
  public:
    LassoEqualizer(std::vector<double> rho, const Constellation& constellation, double noise_var,
                   const Frame& frame, std::vector<std::vector<cplx>> true_taps,
                   LassoOptions opts = {});
    EqualizerOutput equalize(int q, std::span<const cplx> y,
                             const std::vector<std::vector<double>>& log_beta,
                             int turbo_iter) override;

  private:
    std::vector<double> rho_;
    const Constellation& constellation_;
    double noise_var_;
    const Frame& frame_;
    std::vector<std::vector<cplx>> true_taps_;
    LassoOptions opts_;
    std::vector<double> best_mse_;           // per OFDM symbol
    std::vector<EqualizerOutput> frozen_;    // last emitted outputs
};

}  // namespace jced
