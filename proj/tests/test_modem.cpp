#include <doctest.h>

#include <cmath>
#include <set>

#include "jced/modem.hpp"

using jced::cplx;

namespace {

jced::FrameConfig small_cfg() {
    jced::FrameConfig fc;
    fc.n_subcarriers = 8;
    fc.n_taps = 3;
    fc.bits_per_symbol = 2;
    fc.n_pilots = 2;
    fc.n_training = 0;
    fc.n_ofdm_symbols = 1;
    fc.rate = 0.5;
    fc.noise_var = 0.1;
    return fc;
}

}  // namespace

TEST_CASE("QPSK points are (+-1 +- i)/sqrt(2)") {
    const auto con = jced::build_constellation(2);
    REQUIRE(con.size() == 4);
    for (const auto& p : con.points) {
        CHECK(std::abs(std::abs(p.real()) - 1.0 / std::sqrt(2.0)) < 1e-12);
        CHECK(std::abs(std::abs(p.imag()) - 1.0 / std::sqrt(2.0)) < 1e-12);
    }
}

TEST_CASE("16-QAM sits on the odd grid scaled by 1/sqrt(10)") {
    const auto con = jced::build_constellation(4);
    REQUIRE(con.size() == 16);
    const double s = 1.0 / std::sqrt(10.0);
    std::set<int> levels;
    double energy = 0.0;
    for (const auto& p : con.points) {
        const int li = static_cast<int>(std::lround(p.real() / s));
        CHECK((std::abs(li) == 1 || std::abs(li) == 3));
        levels.insert(li);
        energy += std::norm(p);
    }
    CHECK(levels.size() == 4);
    CHECK(energy / 16.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Gray property: nearest neighbours differ in exactly one bit") {
    for (int m : {2, 4, 6}) {
        const auto con = jced::build_constellation(m);
        // find the minimum distance, then check all pairs at it
        double dmin = 1e9;
        for (int a = 0; a < con.size(); ++a)
            for (int b = a + 1; b < con.size(); ++b)
                dmin = std::min(dmin, std::abs(con.points[a] - con.points[b]));
        for (int a = 0; a < con.size(); ++a)
            for (int b = a + 1; b < con.size(); ++b) {
                if (std::abs(con.points[a] - con.points[b]) > dmin * 1.001) continue;
                int diff = 0;
                for (int bit = 0; bit < m; ++bit)
                    diff += con.label_bit(a, bit) != con.label_bit(b, bit);
                CHECK(diff == 1);
            }
    }
    CHECK_THROWS(jced::build_constellation(3));
}

TEST_CASE("unit mean energy over random coded bits") {
    const auto con = jced::build_constellation(4);
    jced::Rng rng(5);
    std::uniform_int_distribution<int> d(0, con.size() - 1);
    double e = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) e += std::norm(con.points[d(rng)]);
    CHECK(e / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("interleaver round trip and determinism") {
    jced::Rng rng(11);
    std::vector<std::uint8_t> bits(10000);
    std::bernoulli_distribution coin(0.5);
    for (auto& b : bits) b = coin(rng);

    const auto fwd = jced::interleave(bits, 99);
    CHECK(jced::deinterleave(fwd, 99) == bits);
    CHECK(jced::interleave(bits, 99) == fwd);
    CHECK(jced::interleave(std::vector<std::uint8_t>{1}, 3) == std::vector<std::uint8_t>{1});

    // llr path inverts too
    std::vector<double> llr(257);
    std::normal_distribution<double> g;
    for (auto& v : llr) v = g(rng);
    const auto fl = jced::interleave_llr(llr, 4);
    const auto bl = jced::deinterleave_llr(fl, 4);
    for (std::size_t i = 0; i < llr.size(); ++i) CHECK(bl[i] == doctest::Approx(llr[i]));
}

TEST_CASE("subcarrier gains: impulses and linearity") {
    std::vector<cplx> x0{cplx(1.0, 0.0)};
    auto z = jced::subcarrier_gains(x0, 8);
    for (const auto& v : z) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-12);

    std::vector<cplx> x1{cplx(0.0, 0.0), cplx(1.0, 0.0)};
    z = jced::subcarrier_gains(x1, 8);
    for (int i = 0; i < 8; ++i)
        CHECK(std::abs(z[i] - std::polar(1.0, -2.0 * M_PI * i / 8.0)) < 1e-12);

    jced::Rng rng(3);
    std::normal_distribution<double> g;
    std::vector<cplx> a(5), b(5);
    for (int j = 0; j < 5; ++j) {
        a[j] = cplx(g(rng), g(rng));
        b[j] = cplx(g(rng), g(rng));
    }
    const cplx scale(1.7, -0.3);
    std::vector<cplx> mix(5);
    for (int j = 0; j < 5; ++j) mix[j] = scale * a[j] + b[j];
    const auto za = jced::subcarrier_gains(a, 16);
    const auto zb = jced::subcarrier_gains(b, 16);
    const auto zm = jced::subcarrier_gains(mix, 16);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(zm[i] - (scale * za[i] + zb[i])) < 1e-12);

    std::vector<cplx> too_long(9);
    CHECK_THROWS(jced::subcarrier_gains(too_long, 8));
}

TEST_CASE("frame assembly: pilot count and coded-bit arithmetic") {
    const auto con = jced::build_constellation(2);
    auto fc = small_cfg();  // N=8, Np=2, M=2, Mt=0 -> 12 coded bits
    CHECK(fc.data_bits() == 12);
    std::vector<std::uint8_t> bits(12, 1);
    jced::Rng rng(1);
    const auto f = jced::assemble_frame(bits, fc, con, rng);
    CHECK(f.layout.pilot_carriers.size() == 2);
    CHECK(f.layout.coded_slots.size() == 12);
    int pilots = 0;
    for (auto v : f.layout.is_pilot) pilots += v;
    CHECK(pilots == 2);

    // all-coded frame: Np=0, Mt=0 -> N*M coded bits
    fc.n_pilots = 0;
    std::vector<std::uint8_t> bits16(16, 0);
    jced::Rng rng2(1);
    const auto f2 = jced::assemble_frame(bits16, fc, con, rng2);
    CHECK(f2.layout.coded_slots.size() == 16);

    // training bits pin the MSB of uniformly spaced data subcarriers
    fc.n_training = 4;
    std::vector<std::uint8_t> bits12(16 - 4, 0);
    jced::Rng rng3(1);
    const auto f3 = jced::assemble_frame(bits12, fc, con, rng3);
    int train = 0;
    for (int i = 0; i < 8; ++i) train += f3.layout.is_training[i];
    CHECK(train == 4);
    for (int i = 0; i < 8; ++i) {
        if (!f3.layout.is_training[i]) continue;
        // MSB = 1 halves the constellation; with Gray QPSK that is Re < 0 or
        // Re > 0 depending on labeling -- verify via the label directly.
        bool found = false;
        for (int k = 0; k < con.size(); ++k)
            if (con.points[k] == f3.symbols[0][i] && con.label_bit(k, 0) == 1) found = true;
        CHECK(found);
    }
}

TEST_CASE("frame: pilot/training both zero means all positions coded") {
    jced::FrameConfig fc;
    fc.n_subcarriers = 16;
    fc.n_taps = 4;
    fc.bits_per_symbol = 4;
    fc.n_pilots = 0;
    fc.n_training = 0;
    fc.n_ofdm_symbols = 2;
    fc.rate = 0.5;
    fc.noise_var = 0.0;
    CHECK(fc.coded_bits() == 128);
    CHECK(fc.info_bits() == 64);
    CHECK(fc.spectral_efficiency() == doctest::Approx(2.0));
}

TEST_CASE("observe: zero noise is exact, noise variance calibrated, seeded") {
    const auto con = jced::build_constellation(2);
    std::vector<cplx> s(64), z(64, cplx(1.0, 0.0));
    jced::Rng rng(2);
    std::uniform_int_distribution<int> d(0, 3);
    for (auto& v : s) v = con.points[d(rng)];

    jced::Rng r0(9);
    const auto y0 = jced::observe(s, z, 0.0, r0);
    for (int i = 0; i < 64; ++i) CHECK(std::abs(y0[i] - s[i]) < 1e-15);

    const double nu_w = 0.37;
    double acc = 0.0;
    long count = 0;
    jced::Rng rn(10);
    for (int rep = 0; rep < 2000; ++rep) {
        const auto y = jced::observe(s, z, nu_w, rn);
        for (int i = 0; i < 64; ++i) acc += std::norm(y[i] - s[i]);
        count += 64;
    }
    CHECK(acc / count == doctest::Approx(nu_w).epsilon(0.02));

    jced::Rng ra(77), rb(77);
    const auto ya = jced::observe(s, z, 0.5, ra);
    const auto yb = jced::observe(s, z, 0.5, rb);
    for (int i = 0; i < 64; ++i) CHECK(ya[i] == yb[i]);
}

TEST_CASE("Eb/N0 accounting round trip") {
    const double eta = 2.0;
    const double nu = jced::noise_variance_from_ebn0(10.0, eta);
    CHECK(nu == doctest::Approx(1.0 / (eta * 10.0)));
    CHECK(jced::noise_variance_from_ebn0(0.0, 1.0) == doctest::Approx(1.0));
}
