#include "jced/hmm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jced {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse2(double a, double b) {
    const double hi = std::max(a, b);
    if (hi == kNegInf) return kNegInf;
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

std::vector<double> forward_backward(std::span<const double> state_llr, const Gm2HmmPrior& prior,
                                     bool posterior_feedback) {
    const std::size_t l = state_llr.size();
    if (l == 0) return {};
    if (prior.length() != l) throw std::invalid_argument("forward_backward: length mismatch");

    // Evidence in log domain, normalized so state 0 contributes 0.
    // Transition log-probs: t[j][a][b] = log Pr{d_{j+1}=b | d_j=a}.
    std::vector<std::array<double, 2>> fwd(l), bwd(l);

    fwd[0] = {safe_log(1.0 - prior.lambda[0]), safe_log(prior.lambda[0])};
    for (std::size_t j = 0; j + 1 < l; ++j) {
        const double t00 = safe_log(1.0 - prior.p10[j]);
        const double t01 = safe_log(prior.p10[j]);
        const double t10 = safe_log(prior.p01[j]);
        const double t11 = safe_log(1.0 - prior.p01[j]);
        const double a0 = fwd[j][0];               // evidence at state 0 is log 1
        const double a1 = fwd[j][1] + state_llr[j];
        double n0 = lse2(a0 + t00, a1 + t10);
        double n1 = lse2(a0 + t01, a1 + t11);
        const double hi = std::max(n0, n1);
        fwd[j + 1] = {n0 - hi, n1 - hi};
    }

    bwd[l - 1] = {0.0, 0.0};
    for (std::size_t j = l - 1; j-- > 0;) {
        const double t00 = safe_log(1.0 - prior.p10[j]);
        const double t01 = safe_log(prior.p10[j]);
        const double t10 = safe_log(prior.p01[j]);
        const double t11 = safe_log(1.0 - prior.p01[j]);
        const double b0 = bwd[j + 1][0];
        const double b1 = bwd[j + 1][1] + state_llr[j + 1];
        double n0 = lse2(t00 + b0, t01 + b1);
        double n1 = lse2(t10 + b0, t11 + b1);
        const double hi = std::max(n0, n1);
        bwd[j] = {n0 - hi, n1 - hi};
    }

    std::vector<double> out(l);
    for (std::size_t j = 0; j < l; ++j) {
        double e0 = fwd[j][0] + bwd[j][0];
        double e1 = fwd[j][1] + bwd[j][1];
        if (posterior_feedback) e1 += state_llr[j];
        if (e0 == kNegInf && e1 == kNegInf)
            throw std::runtime_error("forward_backward: all-zero belief (inconsistent chain)");
        // Pr{d_j = 1} = sigmoid(e1 - e0)
        if (e1 == kNegInf)
            out[j] = 0.0;
        else if (e0 == kNegInf)
            out[j] = 1.0;
        else
            out[j] = 1.0 / (1.0 + std::exp(e0 - e1));
    }
    return out;
}

}  // namespace jced
