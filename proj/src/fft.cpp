#include "jced/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace jced {

namespace {

std::mutex g_planner_mutex;  // FFTW planning is not thread-safe

struct PlanEntry {
    fftw_plan plan = nullptr;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    std::size_t n = 0;
};

struct PlanCache {
    std::map<std::pair<std::size_t, int>, PlanEntry> plans;

    ~PlanCache() {
        std::lock_guard<std::mutex> lock(g_planner_mutex);
        for (auto& [key, e] : plans) {
            fftw_destroy_plan(e.plan);
            fftw_free(e.in);
            fftw_free(e.out);
        }
    }

    PlanEntry& get(std::size_t n, int sign) {
        const auto key = std::make_pair(n, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        std::lock_guard<std::mutex> lock(g_planner_mutex);
        PlanEntry e;
        e.n = n;
        e.in = fftw_alloc_complex(n);
        e.out = fftw_alloc_complex(n);
        e.plan = fftw_plan_dft_1d(static_cast<int>(n), e.in, e.out, sign, FFTW_ESTIMATE);
        if (!e.plan) throw std::runtime_error("fft: plan creation failed");
        return plans.emplace(key, e).first->second;
    }
};

PlanCache& cache() {
    thread_local PlanCache c;
    return c;
}

void run(std::span<const cplx> x, std::vector<cplx>& out, std::size_t n_fft, std::size_t n_out,
         int sign) {
    if (n_fft == 0) throw std::invalid_argument("fft: zero length");
    if (x.size() > n_fft) throw std::invalid_argument("fft: input longer than transform");
    PlanEntry& e = cache().get(n_fft, sign);
    std::memcpy(e.in, x.data(), x.size() * sizeof(cplx));
    std::memset(reinterpret_cast<char*>(e.in) + x.size() * sizeof(cplx), 0,
                (n_fft - x.size()) * sizeof(cplx));
    fftw_execute(e.plan);
    out.resize(n_out);
    std::memcpy(out.data(), e.out, n_out * sizeof(cplx));
}

}  // namespace

void dft_apply(std::span<const cplx> x, std::vector<cplx>& z, std::size_t n) {
    run(x, z, n, n, FFTW_FORWARD);
}

void dft_adjoint(std::span<const cplx> u, std::vector<cplx>& r, std::size_t l) {
    if (l > u.size()) throw std::invalid_argument("fft: adjoint output longer than input");
    run(u, r, u.size(), l, FFTW_BACKWARD);
}

std::vector<cplx> dft_apply(std::span<const cplx> x, std::size_t n) {
    std::vector<cplx> z;
    dft_apply(x, z, n);
    return z;
}

std::vector<cplx> dft_adjoint(std::span<const cplx> u, std::size_t l) {
    std::vector<cplx> r;
    dft_adjoint(u, r, l);
    return r;
}

}  // namespace jced
