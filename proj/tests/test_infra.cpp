#include <doctest.h>

#include <cmath>
#include <complex>

#include "jced/config.hpp"
#include "jced/fft.hpp"
#include "jced/rng.hpp"

using jced::cplx;

TEST_CASE("config parses flat key/value text") {
    const auto cfg = jced::Config::from_string(
        "a = 1.5\n# full comment\nname= hello  # trailing\n list = 1, 2,3\nflag=true\n");
    CHECK(cfg.get_double("a") == doctest::Approx(1.5));
    CHECK(cfg.get_str("name") == "hello");
    CHECK(cfg.get_list("list").size() == 3);
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_int("missing", 7) == 7);
    CHECK_THROWS(cfg.get_str("missing"));
    CHECK_THROWS(jced::Config::from_string("novalue\n"));
}

TEST_CASE("dft matches the naive truncated-DFT sum") {
    jced::Rng rng(42);
    std::normal_distribution<double> g;
    const int n = 16, l = 5;
    std::vector<cplx> x(l);
    for (auto& v : x) v = cplx(g(rng), g(rng));

    const auto z = jced::dft_apply(x, n);
    REQUIRE(z.size() == std::size_t(n));
    for (int i = 0; i < n; ++i) {
        cplx ref(0.0, 0.0);
        for (int j = 0; j < l; ++j) ref += std::polar(1.0, -2.0 * M_PI * i * j / n) * x[j];
        CHECK(std::abs(z[i] - ref) < 1e-10);
    }

    std::vector<cplx> u(n);
    for (auto& v : u) v = cplx(g(rng), g(rng));
    const auto r = jced::dft_adjoint(u, l);
    REQUIRE(r.size() == std::size_t(l));
    for (int j = 0; j < l; ++j) {
        cplx ref(0.0, 0.0);
        for (int i = 0; i < n; ++i) ref += std::polar(1.0, 2.0 * M_PI * i * j / n) * u[i];
        CHECK(std::abs(r[j] - ref) < 1e-10);
    }
}

TEST_CASE("dft adjoint is the true adjoint: <Ax,u> = <x,A^H u>") {
    jced::Rng rng(7);
    std::normal_distribution<double> g;
    const int n = 64, l = 16;
    std::vector<cplx> x(l), u(n);
    for (auto& v : x) v = cplx(g(rng), g(rng));
    for (auto& v : u) v = cplx(g(rng), g(rng));
    const auto ax = jced::dft_apply(x, n);
    const auto ahu = jced::dft_adjoint(u, l);
    cplx lhs(0.0, 0.0), rhs(0.0, 0.0);
    for (int i = 0; i < n; ++i) lhs += ax[i] * std::conj(u[i]);
    for (int j = 0; j < l; ++j) rhs += x[j] * std::conj(ahu[j]);
    CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("derived seeds differ across indices and reproduce") {
    CHECK(jced::derive_seed(1, 2, 3) == jced::derive_seed(1, 2, 3));
    CHECK(jced::derive_seed(1, 2, 3) != jced::derive_seed(1, 3, 2));
    CHECK(jced::derive_seed(1, 2) != jced::derive_seed(2, 2));
}
