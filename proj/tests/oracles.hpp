// Independent numerical oracles used by unit and acceptance tests. These take
// the raw definitions (posterior integrals, joint pmfs, joint Gaussian
// moments) and evaluate them by brute force; they never share code with the
// library implementations they check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "jced/constellation.hpp"
#include "jced/prior.hpp"

namespace oracles {

using jced::cplx;
constexpr double kPi = std::numbers::pi;

// Gauss-Hermite nodes/weights for weight exp(-t^2) via Golub-Welsch.
struct GaussHermite {
    std::vector<double> node, weight;
    explicit GaussHermite(int n) {
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(i / 2.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
        node.resize(n);
        weight.resize(n);
        for (int i = 0; i < n; ++i) {
            node[i] = es.eigenvalues()(i);
            const double v0 = es.eigenvectors()(0, i);
            weight[i] = std::sqrt(kPi) * v0 * v0;
        }
    }
};

inline double cn_pdf(cplx x, cplx mean, double var) {
    return std::exp(-std::norm(x - mean) / var) / (kPi * var);
}

// One mixture component integrated as h(z) * CN(z; center, var): the nodes
// ride on the Gaussian factor written as the weight; h is the other factor.
struct ComponentMoments {
    cplx center{0.0, 0.0};  // GH expansion center
    double mass = 0.0;      // integral of the product
    cplx first{0.0, 0.0};   // integral of z * product
    double second = 0.0;    // integral of |z - center|^2 * product
};

template <typename H>
ComponentMoments gh_component(const GaussHermite& gh, cplx center, double var, H&& h) {
    ComponentMoments m;
    m.center = center;
    const double scale = std::sqrt(var);
    for (std::size_t a = 0; a < gh.node.size(); ++a) {
        const double wa = gh.weight[a];
        for (std::size_t b = 0; b < gh.node.size(); ++b) {
            const cplx dz = scale * cplx(gh.node[a], gh.node[b]);
            const double w = wa * gh.weight[b] / kPi * h(center + dz);
            m.mass += w;
            m.first += w * (center + dz);
            m.second += w * std::norm(dz);
        }
    }
    return m;
}

struct PosteriorMoments {
    cplx mean{0.0, 0.0};
    double var = 0.0;
};

// Combine weighted component moments into posterior mean/variance. The
// variance recombination about the global mean is exact algebra:
// |z-mu|^2 = |z-c|^2 + 2 Re{(z-c) conj(c-mu)} + |c-mu|^2.
inline PosteriorMoments combine(std::span<const ComponentMoments> parts,
                                std::span<const double> coefs) {
    double z0 = 0.0;
    cplx z1{0.0, 0.0};
    for (std::size_t c = 0; c < parts.size(); ++c) {
        z0 += coefs[c] * parts[c].mass;
        z1 += coefs[c] * parts[c].first;
    }
    PosteriorMoments out;
    out.mean = z1 / z0;
    double m2 = 0.0;
    for (std::size_t c = 0; c < parts.size(); ++c) {
        const cplx d = parts[c].center - out.mean;
        const cplx cross = parts[c].first - parts[c].center * parts[c].mass;  // int (z-c) w
        m2 += coefs[c] *
              (parts[c].second + 2.0 * (cross * std::conj(d)).real() + std::norm(d) * parts[c].mass);
    }
    out.var = m2 / z0;
    return out;
}

// Posterior mean and variance of z given y under
//   p(y|z) = sum_k beta_k CN(y; s_k z, nu_w),  z ~ CN(p_hat, nu_z),
// straight from the definition (D1). CN(y; s z, nu_w) viewed as a Gaussian in
// z has center y/s and variance nu_w/|s|^2 with an extra 1/|s|^2 Jacobian.
inline PosteriorMoments gout_oracle(const GaussHermite& gh, cplx y, cplx p_hat, double nu_z,
                                    std::span<const double> beta,
                                    const jced::Constellation& con, double nu_w) {
    std::vector<ComponentMoments> parts(con.size());
    std::vector<double> coefs(con.size());
    for (int k = 0; k < con.size(); ++k) {
        const cplx s = con.points[k];
        const cplx yc = y / s;
        const double vc = nu_w / std::norm(s);
        coefs[k] = beta[k] / std::norm(s);
        parts[k] = vc <= nu_z
                       ? gh_component(gh, yc, vc, [&](cplx z) { return cn_pdf(z, p_hat, nu_z); })
                       : gh_component(gh, p_hat, nu_z, [&](cplx z) { return cn_pdf(z, yc, vc); });
    }
    return combine(parts, coefs);
}

// Posterior mean and variance of x given r_hat under the GM2 prior (D4)-(D6).
inline PosteriorMoments gin_oracle(const GaussHermite& gh, cplx r_hat, double nu_r,
                                   double lambda, double nu0, double nu1) {
    const double coefs[2] = {1.0 - lambda, lambda};
    const double v[2] = {nu0, nu1};
    std::vector<ComponentMoments> parts(2);
    for (int c = 0; c < 2; ++c) {
        parts[c] = v[c] <= nu_r
                       ? gh_component(gh, cplx(0.0, 0.0), v[c],
                                      [&](cplx x) { return cn_pdf(x, r_hat, nu_r); })
                       : gh_component(gh, r_hat, nu_r,
                                      [&](cplx x) { return cn_pdf(x, cplx(0.0, 0.0), v[c]); });
    }
    return combine(parts, std::span<const double>(coefs, 2));
}

// Exhaustive sum-product marginals on a binary chain of length <= ~20.
// evidence_llr excluded at the queried lag when extrinsic = true.
inline std::vector<double> chain_enumeration(std::span<const double> evidence_llr,
                                             const jced::Gm2HmmPrior& prior, bool extrinsic) {
    const int l = static_cast<int>(evidence_llr.size());
    std::vector<double> out(l, 0.0);
    for (int j = 0; j < l; ++j) {
        double num = 0.0, den = 0.0;
        for (long s = 0; s < (1L << l); ++s) {
            auto bit = [&](int i) { return (s >> i) & 1L; };
            double logp = std::log(bit(0) ? prior.lambda[0] : 1.0 - prior.lambda[0]);
            for (int i = 0; i + 1 < l; ++i) {
                const double t = bit(i) ? (bit(i + 1) ? 1.0 - prior.p01[i] : prior.p01[i])
                                        : (bit(i + 1) ? prior.p10[i] : 1.0 - prior.p10[i]);
                logp += std::log(t);
            }
            for (int i = 0; i < l; ++i) {
                if (extrinsic && i == j) continue;
                if (bit(i)) logp += evidence_llr[i];
            }
            const double p = std::exp(logp);
            den += p;
            if (bit(j)) num += p;
        }
        out[j] = num / den;
    }
    return out;
}

// Conditional-Gaussian estimator from joint second moments: x ~ CN(0, Cx),
// y = B x + n with cov(n) = Cn. Dense, full-pivot solves.
inline Eigen::VectorXcd joint_gaussian_mmse(const Eigen::MatrixXcd& b,
                                            const Eigen::MatrixXcd& cx,
                                            const Eigen::MatrixXcd& cn,
                                            const Eigen::VectorXcd& y,
                                            Eigen::MatrixXcd* posterior_cov = nullptr) {
    const Eigen::MatrixXcd cxy = cx * b.adjoint();
    const Eigen::MatrixXcd cyy = b * cx * b.adjoint() + cn;
    const Eigen::MatrixXcd gain = cyy.fullPivLu().solve(cxy.adjoint()).adjoint();
    if (posterior_cov) *posterior_cov = cx - gain * cxy.adjoint();
    return gain * y;
}

inline Eigen::MatrixXcd dense_dft(int n, int l) {
    Eigen::MatrixXcd phi(n, l);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < l; ++j)
            phi(i, j) = std::polar(1.0, -2.0 * kPi * double(i) * double(j) / double(n));
    return phi;
}

}  // namespace oracles
