#include "doctest.h"
#include "oracles.hpp"

#include "pinlab/kernels.hpp"
#include "pinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace pinlab;
using namespace pinlab::kernels;

namespace {

double table_at(const KernelTable& t, int n, const oracle::Site& x) {
    return t.p(n, std::span<const int>(x.data(), t.d()));
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("small step counts have their textbook values") {
    auto t1 = build_kernel_table(1, 4);
    CHECK(t1.p(0, {0}) == 1.0);
    CHECK(t1.p(2, {0}) == 0.5);
    auto t2 = build_kernel_table(2, 2);
    CHECK(t2.p(1, {1, 0}) == 0.25);
    CHECK(t2.p(1, {0, -1}) == 0.25);
    CHECK(t2.p(1, {0, 0}) == 0.0);
}

TEST_CASE("tables match a dense convolution of the step law") {
    for (int d = 1; d <= 4; ++d) {
        const int n_max = d <= 2 ? 9 : 6;
        auto tab = build_kernel_table(d, n_max);
        for (int n = 0; n <= n_max; ++n) {
            const auto law = oracle::srw_law(d, n);
            double worst = 0.0;
            for (const auto& [x, p] : law) worst = std::max(worst, std::fabs(table_at(tab, n, x) - p));
            CHECK_MESSAGE(worst < 1e-15, "d=" << d << " n=" << n);
        }
    }
}

TEST_CASE("normalization, parity and symmetry") {
    auto tab = build_kernel_table(3, 40);
    for (int n = 0; n <= 40; ++n) CHECK(std::fabs(tab.total_mass(n) - 1.0) < 1e-12);
    // wrong parity is never stored
    CHECK(tab.p(4, {1, 0, 0}) == 0.0);
    CHECK(tab.p(7, {2, 2, 0}) == 0.0);
    // every signed permutation of a point gives the same bits
    const int x[3] = {3, -1, 2};
    const double ref = tab.p(10, std::span<const int>(x, 3));
    std::array<int, 3> perm{0, 1, 2};
    do {
        for (int signs = 0; signs < 8; ++signs) {
            int y[3];
            for (int i = 0; i < 3; ++i) y[i] = x[perm[i]] * ((signs >> i) & 1 ? -1 : 1);
            CHECK(tab.p(10, std::span<const int>(y, 3)) == ref);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("Chapman-Kolmogorov on random samples") {
    auto tab = build_kernel_table(2, 30);
    std::mt19937_64 g(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int m = static_cast<int>(g() % 15), n = static_cast<int>(g() % 15);
        int x[2] = {static_cast<int>(g() % 9) - 4, static_cast<int>(g() % 9) - 4};
        double sum = 0.0;
        for (int a = -m; a <= m; ++a)
            for (int b = -m; b <= m; ++b) {
                const int y[2] = {a, b};
                const int r[2] = {x[0] - a, x[1] - b};
                sum += tab.p(m, std::span<const int>(y, 2)) * tab.p(n, std::span<const int>(r, 2));
            }
        CHECK(std::fabs(sum - tab.p(m + n, std::span<const int>(x, 2))) < 1e-10);
    }
}

TEST_CASE("budget guard names the offending size") {
    try {
        build_kernel_table(6, 400, 1000);
        FAIL("expected BudgetExceeded");
    } catch (const BudgetExceeded& e) {
        const std::string msg = e.what();
        CHECK(msg.find("d=6") != std::string::npos);
        CHECK(msg.find("400") != std::string::npos);
    }
}

TEST_CASE("cache files round-trip bit-identically") {
    auto tab = build_kernel_table(3, 12);
    const auto path = std::filesystem::temp_directory_path() / "pinlab_kernel_roundtrip.bin";
    tab.save(path.string());
    auto back = KernelTable::load(path.string());
    std::filesystem::remove(path);
    REQUIRE(back.n_max() == 12);
    for (int n = 0; n <= 12; ++n) {
        auto a = tab.values(n), b = back.values(n);
        REQUIRE(a.size() == b.size());
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST_CASE("pair return mass") {
    auto t1 = build_kernel_table(1, 4);
    CHECK(t1.pair_return_mass(1) == doctest::Approx(0.5).epsilon(1e-15));
    auto t4 = build_kernel_table(4, 40);
    CHECK(t4.pair_return_mass(1) == doctest::Approx(0.125).epsilon(1e-15));
    // against the closed forms in d = 1 and d = 2
    auto series1 = pair_return_series(1, 50);
    auto series2 = pair_return_series(2, 50);
    for (int n = 0; n <= 50; ++n) {
        const double q = oracle::binom(2 * n, n) / std::pow(4.0, n);
        CHECK(series1[n] == doctest::Approx(q).epsilon(1e-12));
        CHECK(series2[n] == doctest::Approx(q * q).epsilon(1e-12));
    }
    // the table route and the series route agree
    auto s4 = pair_return_series(4, 40);
    for (int n = 1; n <= 40; ++n) CHECK(t4.pair_return_mass(n) == doctest::Approx(s4[n]).epsilon(1e-12));
    // d = 4: n^2 p(n) is flat near n = 20 (C n^{-2} law)
    auto s = pair_return_series(4, 80);
    const double c20 = 400.0 * s[20], c80 = 6400.0 * s[80];
    CHECK(std::fabs(c20 / c80 - 1.0) < 0.05);
}

TEST_CASE("continuous kernels") {
    const int zero3[3] = {0, 0, 0};
    CHECK(ct_kernel_point(3, 0.0, std::span<const int>(zero3, 3)) == 1.0);
    // d = 1: e^{-t} I_0(t) from the standard library Bessel function
    const int zero1[1] = {0};
    const double ref = std::exp(-2.0) * std::cyl_bessel_i(0.0, 2.0);
    CHECK(ct_kernel_point(1, 2.0, std::span<const int>(zero1, 1), 1e-14) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(ct_kernel_poisson(1, 2.0, std::span<const int>(zero1, 1), 1e-14) ==
          doctest::Approx(ref).epsilon(1e-12));
    // d = 2, t = 5: total mass over a Poisson-sized box
    const int R = ct_radius(5.0, 1e-12);
    double total = 0.0;
    for (int a = -R; a <= R; ++a)
        for (int b = -R; b <= R; ++b) {
            if (std::abs(a) + std::abs(b) > R) continue;
            const int x[2] = {a, b};
            total += ct_kernel_point(2, 5.0, std::span<const int>(x, 2), 1e-15);
        }
    CHECK(std::fabs(total - 1.0) < 1e-10);
    // product formula against Poissonization in d = 3
    const int x3[3] = {1, 0, 2};
    CHECK(ct_kernel_point(3, 4.0, std::span<const int>(x3, 3)) ==
          doctest::Approx(ct_kernel_poisson(3, 4.0, std::span<const int>(x3, 3), 1e-15)).epsilon(1e-10));
}

TEST_CASE("characteristic triple") {
    const double k0[4] = {0, 0, 0, 0};
    auto c = char_triple(std::span<const double>(k0, 4), 0.05);
    CHECK(c.phi == 1.0);
    CHECK(c.psi == 1.0);
    CHECK(c.varphi == std::complex<double>(1.0, 0.0));
    const double pi = std::numbers::pi;
    const double kp[4] = {pi, pi, pi, pi};
    c = char_triple(std::span<const double>(kp, 4), 0.05);
    CHECK(c.phi == doctest::Approx(-1.0));
    CHECK(c.psi == doctest::Approx(1.0));
    CHECK(c.varphi.real() == doctest::Approx(-1.0));
    CHECK(std::fabs(c.varphi.imag()) < 1e-15);
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> U(-pi, pi);
    for (int i = 0; i < 100; ++i) {
        const double k[4] = {U(g), U(g), U(g), U(g)};
        auto t0 = char_triple(std::span<const double>(k, 4), 0.0);
        CHECK(t0.psi == doctest::Approx(t0.phi * t0.phi));
        CHECK(t0.varphi.real() == doctest::Approx(t0.phi));
        auto th = char_triple(std::span<const double>(k, 4), 0.1);
        CHECK(th.psi <= th.phi * th.phi + 1e-15);
    }
}

TEST_CASE("Green functions") {
    CHECK(green_pair(1).divergent);
    CHECK(green_pair(2).divergent);
    for (int d : {3, 4, 5}) {
        auto g = green_pair(d, 1e-6);
        CHECK_FALSE(g.divergent);
        CHECK(std::fabs(g.g_pair_series - g.g_pair_quad) / g.g_pair < 1e-6);
    }
    // G^{X-Y} = 1/(1 - P(return)) - 1 in d = 3, with the Watson integral value
    CHECK(green_pair(3).g_pair == doctest::Approx(1.0 / (1.0 - 0.3405373295503356) - 1.0).epsilon(1e-9));

    auto g0 = green_ct(3, 0.0, 1e-6);
    CHECK(std::fabs(g0.g_ct_quad - g0.g_ct_time) / g0.g_ct < 1e-6);
    double prev = g0.g_ct;
    for (double rho : {0.5, 1.0, 3.0, 10.0}) {
        auto g = green_ct(3, rho);
        CHECK(g.g_ct * (1.0 + rho) == doctest::Approx(g0.g_ct).epsilon(1e-13));
        CHECK(g.g_ct < prev);
        prev = g.g_ct;
    }
}

TEST_CASE("tilted Green functions") {
    auto t0 = tilted_greens(4, 0.0);
    const double G = green_pair(4).g_pair;
    CHECK(std::fabs(t0.g_even - G) < 1e-10 * G);
    CHECK(std::fabs(t0.g_odd - G) < 1e-10 * G);
    CHECK(std::fabs(t0.gap) < 1e-12);
    auto t = tilted_greens(4, 0.05);
    CHECK(t.g_even < t.g_odd);
    CHECK(t.gap > 0.0);
    CHECK(t.gap == doctest::Approx(t.gap_direct).epsilon(1e-6));
    std::vector<double> per_h;
    for (double h : {0.01, 0.02, 0.04}) per_h.push_back(tilted_greens(4, h).gap / h);
    const auto [lo, hi] = std::minmax_element(per_h.begin(), per_h.end());
    CHECK(*hi / *lo - 1.0 < 0.05);
}

TEST_CASE("entropy sums") {
    std::vector<double> gap;
    for (double t : {1e3, 1e4, 1e5}) {
        auto e = entropy_sum(1, 1.0, t);
        gap.push_back(std::fabs(e.value / std::log(t) + 0.5));
        CHECK(e.truncation_bound < 1e-8);
    }
    CHECK(gap[1] < gap[0]);
    CHECK(gap[2] < gap[1]);
    std::vector<double> gap2;
    for (double t : {1e3, 1e4}) gap2.push_back(std::fabs(entropy_sum(2, 1.0, t).value / std::log(t) + 1.0));
    CHECK(gap2[1] < gap2[0]);
    // ρ = 0 collapses to log p_t(0) = log(e^{-t} I_0(t))
    const double t = 50.0;
    CHECK(entropy_sum(1, 0.0, t).value ==
          doctest::Approx(std::log(std::exp(-t) * std::cyl_bessel_i(0.0, t))).epsilon(1e-10));
}

TEST_CASE("one-dimensional kernel bounds") {
    const std::vector<double> ts = {0.0, 100.0};
    const std::vector<long> xs = {0, 5, 50, 300};
    auto rep = kernel_bound_report(ts, xs, 0.1, 2.0);
    CHECK(rep.C1 > 0.0);
    for (const auto& r : rep.rows) {
        CHECK(r.t > 0.0);
        CHECK(r.holds);
    }
    const auto far = std::find_if(rep.rows.begin(), rep.rows.end(), [](const BoundRow& r) { return r.x == 300; });
    REQUIRE(far != rep.rows.end());
    CHECK(far->regime == 3);
    CHECK(far->log_p >= -2.0 * 300.0 * std::log(300.0));
}

} // TEST_SUITE
