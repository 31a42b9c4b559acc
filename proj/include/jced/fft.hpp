#pragma once

#include <complex>
#include <span>
#include <vector>

namespace jced {

using cplx = std::complex<double>;

// Unnormalized DFT pair used throughout: Phi_ij = exp(-2*pi*i*ij/N), an N x L
// truncated DFT with unit-modulus entries.
//
// dft_apply      : z = Phi * x   (x zero-padded to N, forward transform)
// dft_adjoint    : r = Phi^H * u (unnormalized inverse transform, first L bins)
//
// Backed by FFTW with per-thread plan caches; safe to call concurrently from
// worker threads. N must be >= 1 (any size FFTW supports; powers of two are
// the fast path).
void dft_apply(std::span<const cplx> x, std::vector<cplx>& z, std::size_t n);
void dft_adjoint(std::span<const cplx> u, std::vector<cplx>& r, std::size_t l);

std::vector<cplx> dft_apply(std::span<const cplx> x, std::size_t n);
std::vector<cplx> dft_adjoint(std::span<const cplx> u, std::size_t l);

}  // namespace jced
