#include "doctest.h"
#include "oracles.hpp"

#include "pinlab/renewal.hpp"

#include <cmath>

using namespace pinlab;
using namespace pinlab::renewal;

namespace {

// E[p^X_n(Y^h_n)] for even n, with Y^h_n a sum of n/2 independent two-step blocks.
double even_expectation_oracle(int d, double h, int n) {
    oracle::Dist y{{oracle::Site{}, 1.0}};
    const auto block = oracle::two_step_law(d, h);
    for (int k = 0; k < n / 2; ++k) y = oracle::convolve(y, block);
    const auto x = oracle::srw_law(d, n);
    double acc = 0.0;
    for (const auto& [site, p] : y) {
        auto it = x.find(site);
        if (it != x.end()) acc += p * it->second;
    }
    return acc;
}

} // namespace

TEST_SUITE("renewal") {

TEST_CASE("sampled renewal sets") {
    auto law = annealed::renewal_law_discrete(4, 500);
    for (std::uint64_t r = 0; r < 20; ++r) {
        auto p = sample_renewal(law, 300, 7, r);
        REQUIRE(!p.points.empty());
        CHECK(p.points.front() == 0);
        bool inc = true;
        for (std::size_t i = 1; i < p.points.size(); ++i) inc = inc && p.points[i] > p.points[i - 1];
        CHECK(inc);
        CHECK(p.points.back() <= 300);
    }
    auto a = sample_renewal(law, 300, 7, 3), b = sample_renewal(law, 300, 7, 3);
    CHECK(a.points == b.points);
}

TEST_CASE("generating function recursion") {
    auto law = annealed::renewal_law_discrete(4, 300);
    CHECK(exact_gf_dp(law, 200, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double s : {0.3, 0.8, 0.97})
        for (int N : {1, 10, 100}) {
            const double ref = oracle::renewal_gf(law.K, law.tail_mass(law.n_max()), N, s);
            CHECK(exact_gf_dp(law, N, s) == doctest::Approx(ref).epsilon(1e-12));
        }
    // monotone in s
    CHECK(exact_gf_dp(law, 100, 0.5) < exact_gf_dp(law, 100, 0.9));
    auto mc = gf_mc(law, 100, 0.8, 4000, 3);
    CHECK(std::fabs(mc.mean - exact_gf_dp(law, 100, 0.8)) < 3 * mc.stderr_);
}

TEST_CASE("gap probability scan") {
    auto law = annealed::renewal_law_discrete(4, 1024);
    AppendixAParams prm;
    prm.N_grid = {64, 128, 256, 512, 1024};
    auto t = appendixA_scan(prm, law);
    REQUIRE(t.rows.size() == 5);
    CHECK(t.strictly_decreasing);
    CHECK(t.max_decade_ratio < 0.7);
    for (const auto& r : t.rows) {
        CHECK(r.s == doctest::Approx(std::exp(-std::pow(double(r.N), -0.55))));
        CHECK(r.value == doctest::Approx(exact_gf_dp(law, r.N, r.s)));
    }
    // δ₁ = 0 uses a fixed s and the value is already small
    prm.delta1 = 0.0;
    auto t0 = appendixA_scan(prm, law);
    for (const auto& r : t0.rows) CHECK(r.s == doctest::Approx(std::exp(-1.0)));
    CHECK(t0.rows.back().value < 0.05);
    prm.delta1 = 0.95;
    CHECK_THROWS_AS(appendixA_scan(prm, law), InvalidArgument);
}

TEST_CASE("parity-dependent laws") {
    // the moment route against position space and against a dense oracle
    for (int d : {3, 4})
        for (double h : {0.0, 0.15}) {
            auto [Ee, Eo] = parity_expectations_moments(d, h, 10);
            std::vector<double> De, Do;
            parity_expectations_direct(d, h, 10, De, Do);
            for (int n = 1; n <= 10; ++n) {
                CHECK(Ee[n] == doctest::Approx(De[n]).epsilon(1e-11));
                CHECK(Eo[n] == doctest::Approx(Do[n]).epsilon(1e-11));
            }
            for (int n : {2, 4, 6}) CHECK(Ee[n] == doctest::Approx(even_expectation_oracle(d, h, n)).epsilon(1e-12));
        }

    auto p0 = parity_law(4, 0.0, 256);
    auto pair = annealed::renewal_law_discrete(4, 256);
    for (long n = 1; n <= 256; ++n) {
        CHECK(p0.K_even.K[n] == doctest::Approx(pair.K[n]).epsilon(1e-10));
        CHECK(p0.K_odd.K[n] == doctest::Approx(pair.K[n]).epsilon(1e-10));
    }
    CHECK(p0.G_even == doctest::Approx(p0.G_pair).epsilon(1e-10));

    auto ph = parity_law(4, 0.125, 256);
    CHECK(ph.cross_check_error < 1e-10);
    CHECK(ph.K_even.total_mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(ph.K_odd.total_mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(ph.G_even < ph.G_odd);
    CHECK(ph.E_even[1] == doctest::Approx(p0.E_even[1]).epsilon(1e-14));
    for (long n = 1; n <= 256; ++n) CHECK(ph.K_even.K[n] >= 0.0);
}

TEST_CASE("dominating law") {
    auto l4 = annealed::renewal_law_discrete(4, 400);
    auto one = dominating_law({l4}, 400);
    CHECK(one.raw_mass == doctest::Approx(1.0).epsilon(1e-12));
    for (long n = 1; n <= 400; ++n) CHECK(one.law.K[n] == doctest::Approx(l4.K[n]).epsilon(1e-9));
    CHECK(one.certificate.holds);

    auto ph = parity_law(4, 0.125, 400);
    auto dom = dominating_law({ph.K_even, ph.K_odd}, 400);
    CHECK(dom.certificate.holds);
    CHECK(dom.raw_mass >= 1.0 - 1e-12);
    CHECK(dom.law.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
    const auto T = tail_function(dom.law, 400);
    const auto Te = tail_function(ph.K_even, 400), To = tail_function(ph.K_odd, 400);
    for (long n = 1; n <= 401; ++n) {
        CHECK(T[n] >= Te[n] - 1e-12);
        CHECK(T[n] >= To[n] - 1e-12);
    }
    auto p5 = parity_law(5, 0.1, 64);
    auto d5 = dominating_law({p5.K_even, p5.K_odd}, 64);
    CHECK(d5.law.mean_finite);
    CHECK_THROWS_AS(dominating_law({}, 10), InvalidArgument);
}

} // TEST_SUITE
