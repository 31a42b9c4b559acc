#pragma once

#include <complex>
#include <vector>

namespace jced {

using cplx = std::complex<double>;

// Gray-labeled square QAM, unit mean energy. Point index k doubles as the bit
// label: bit m of k (m = 0 is the MSB) is the m-th mapped bit c_{m+1}. The
// per-axis labeling is binary-reflected Gray, so nearest neighbours differ in
// exactly one bit.
struct Constellation {
    int bits_per_symbol = 0;  // M
    std::vector<cplx> points; // 2^M entries

    int size() const { return static_cast<int>(points.size()); }

    // Bit m (0 = MSB) of label k.
    int label_bit(int k, int m) const { return (k >> (bits_per_symbol - 1 - m)) & 1; }

    // Label with bit m forced to value c, other bits from k.
    int with_bit(int k, int m, int c) const {
        const int mask = 1 << (bits_per_symbol - 1 - m);
        return c ? (k | mask) : (k & ~mask);
    }
};

// M in {2, 4, 6}: QPSK, 16-QAM, 64-QAM.
Constellation build_constellation(int bits_per_symbol);

}  // namespace jced
