#include "jced/prior.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jced {

void Gm2HmmPrior::validate(double consistency_tol) const {
    const std::size_t l = length();
    if (l == 0) throw std::invalid_argument("prior: empty");
    if (nu0.size() != l || nu1.size() != l || p01.size() != l || p10.size() != l)
        throw std::invalid_argument("prior: ragged arrays");
    for (std::size_t j = 0; j < l; ++j) {
        const bool ok = lambda[j] >= 0.0 && lambda[j] <= 1.0 && nu0[j] >= 0.0 &&
                        nu1[j] > nu0[j] && p01[j] >= 0.0 && p01[j] <= 1.0 && p10[j] >= 0.0 &&
                        p10[j] <= 1.0 && std::isfinite(nu1[j]);
        if (!ok)
            throw std::invalid_argument("prior: invalid parameters at lag " + std::to_string(j));
    }
    if (consistency_residual() > consistency_tol)
        throw std::invalid_argument("prior: chain/marginal consistency violated");
}

double Gm2HmmPrior::consistency_residual() const {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < length(); ++j) {
        const double next = lambda[j] * (1.0 - p01[j]) + (1.0 - lambda[j]) * p10[j];
        worst = std::max(worst, std::abs(lambda[j + 1] - next));
    }
    return worst;
}

void Gm2HmmPrior::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("prior: cannot open " + path);
    char line[160];
    for (std::size_t j = 0; j < length(); ++j) {
        std::snprintf(line, sizeof line, "%zu %.17g %.17g %.17g %.17g %.17g\n", j, lambda[j],
                      nu0[j], nu1[j], p01[j], p10[j]);
        out << line;
    }
    if (!out) throw std::runtime_error("prior: write failed for " + path);
}

Gm2HmmPrior Gm2HmmPrior::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("prior: cannot open " + path);
    Gm2HmmPrior p;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::size_t j;
        double lam, v0, v1, q01, q10;
        if (!(row >> j >> lam >> v0 >> v1 >> q01 >> q10))
            throw std::runtime_error("prior: malformed row in " + path);
        if (j != p.length()) throw std::runtime_error("prior: rows out of order in " + path);
        p.lambda.push_back(lam);
        p.nu0.push_back(v0);
        p.nu1.push_back(v1);
        p.p01.push_back(q01);
        p.p10.push_back(q10);
    }
    if (p.length() == 0) throw std::runtime_error("prior: empty file " + path);
    return p;
}

Gm2HmmPrior enforce_consistency(Gm2HmmPrior prior) {
    for (std::size_t j = 0; j + 1 < prior.length(); ++j)
        prior.lambda[j + 1] =
            prior.lambda[j] * (1.0 - prior.p01[j]) + (1.0 - prior.lambda[j]) * prior.p10[j];
    return prior;
}

}  // namespace jced
