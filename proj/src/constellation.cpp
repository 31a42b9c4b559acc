#include "jced/constellation.hpp"

#include <cmath>
#include <stdexcept>

namespace jced {

namespace {

// Binary-reflected Gray decode: label g -> level index.
int gray_to_index(int g) {
    int i = g;
    for (int shift = 1; shift < 16; shift <<= 1) i ^= i >> shift;
    return i;
}

}  // namespace

Constellation build_constellation(int bits_per_symbol) {
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6)
        throw std::invalid_argument("constellation: bits per symbol must be 2, 4 or 6");

    const int m_axis = bits_per_symbol / 2;
    const int levels = 1 << m_axis;
    // Mean energy of odd-integer PAM levels is (4^m - 1)/3 per axis.
    const double axis_energy = (std::pow(4.0, m_axis) - 1.0) / 3.0;
    const double scale = 1.0 / std::sqrt(2.0 * axis_energy);

    Constellation c;
    c.bits_per_symbol = bits_per_symbol;
    c.points.resize(std::size_t(1) << bits_per_symbol);
    for (int k = 0; k < c.size(); ++k) {
        const int gi = k >> m_axis;             // first M/2 bits label the I axis
        const int gq = k & (levels - 1);        // last M/2 bits label the Q axis
        const double ai = 2 * gray_to_index(gi) - (levels - 1);
        const double aq = 2 * gray_to_index(gq) - (levels - 1);
        c.points[k] = cplx(ai, aq) * scale;
    }
    return c;
}

}  // namespace jced
