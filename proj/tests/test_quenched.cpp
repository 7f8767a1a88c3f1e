#include "doctest.h"
#include "oracles.hpp"

#include "pinlab/kernels.hpp"
#include "pinlab/quenched.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace pinlab;
using namespace pinlab::quenched;
using disorder::DisorderPath;

namespace {

ModelParams discrete(int d, double beta) { return {Mode::discrete, d, beta, 0.0}; }

DisorderPath fixed_path(int d, std::vector<std::uint8_t> steps) {
    DisorderPath p;
    p.d = d;
    p.horizon = static_cast<double>(steps.size());
    p.steps = std::move(steps);
    return p;
}

// E_0[exp(β L_t)] for the rate-1 walk in d = 1 with the catalyst fixed at 0:
// exp(t(Δ + β δ_0)) applied to 1 on [-R, R], via a symmetric eigensolve.
double frozen_catalyst_oracle(double beta, double t, int R) {
    const int n = 2 * R + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = -1.0;
        if (i > 0) A(i, i - 1) = 0.5;
        if (i + 1 < n) A(i, i + 1) = 0.5;
    }
    A(R, R) += beta;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd c = es.eigenvectors().transpose() * ones;
    Eigen::VectorXd e = (es.eigenvalues() * t).array().exp();
    const Eigen::VectorXd u = es.eigenvectors() * (e.asDiagonal() * c);
    return u(R);
}

} // namespace

TEST_SUITE("quenched") {

TEST_CASE("three routes agree with a recursive enumeration") {
    std::mt19937_64 g(17);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 1 + trial % 3;
        const long N = d == 1 ? 8 : (d == 2 ? 6 : 5);
        const double beta = -0.5 + 2.0 * (g() % 1000) / 1000.0;
        auto path = disorder::sample_discrete(d, N, 100 + trial);
        const auto Y = oracle::positions(path.steps);
        auto tab = kernels::build_kernel_table(d, N);
        for (bool constrained : {false, true}) {
            const double ref = oracle::brute_partition(d, beta, Y, static_cast<int>(N), constrained);
            const auto p = discrete(d, beta);
            const double a = enumerate_partition(p, path, N, constrained).value();
            const double b = field_dp_partition(p, path, N, constrained).value();
            const double c = renewal_dp_partition(p, path, N, constrained, tab).value();
            CHECK(a == doctest::Approx(ref).epsilon(1e-12));
            CHECK(b == doctest::Approx(ref).epsilon(1e-10));
            CHECK(c == doctest::Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("small instances by hand") {
    auto path = fixed_path(1, {0}); // Y_1 = +1
    CHECK(enumerate_partition(discrete(1, 1.0), path, 1, false).value() ==
          doctest::Approx(1.0 + (std::exp(1.0) - 1.0) / 2.0).epsilon(1e-14));
    CHECK(enumerate_partition(discrete(1, 1.0), path, 1, false).value() == doctest::Approx(1.859141).epsilon(1e-6));
    auto p5 = disorder::sample_discrete(2, 6, 3);
    CHECK(enumerate_partition(discrete(2, 0.0), p5, 6, false).log_value == 0.0);
    CHECK(field_dp_partition(discrete(2, -0.7), p5, 6, false).value() <= 1.0);
    CHECK_THROWS_AS(enumerate_partition(discrete(4, 0.5), disorder::sample_discrete(4, 9, 1), 9, false),
                    InstanceTooLarge);
}

TEST_CASE("constrained value at zero coupling is the endpoint mass") {
    for (int d : {1, 2, 3}) {
        const long N = 6;
        auto path = disorder::sample_discrete(d, N, 40 + d);
        const auto Y = oracle::positions(path.steps);
        const auto law = oracle::srw_law(d, static_cast<int>(N));
        const auto it = law.find(Y[N]);
        const double mass = it == law.end() ? 0.0 : it->second;
        if (mass == 0.0) continue;
        CHECK(field_dp_partition(discrete(d, 0.0), path, N, true).value() == doctest::Approx(mass).epsilon(1e-13));
        CHECK(enumerate_partition(discrete(d, 0.0), path, N, true).value() == doctest::Approx(mass).epsilon(1e-13));
    }
}

TEST_CASE("renewal recursion edge cases") {
    auto path = disorder::sample_discrete(4, 24, 8);
    auto tab = kernels::build_kernel_table(4, 24);
    // z' = 0
    CHECK(renewal_dp_partition(discrete(4, 0.0), path, 24, false, tab).log_value == 0.0);
    auto seq0 = pinned_sequence(0.0, path, 24, tab);
    CHECK(seq0[0] == 1.0);
    for (long j = 1; j <= 24; ++j) CHECK(seq0[j] == 0.0);
    // a single gap
    const double zp = std::expm1(0.9);
    auto seq = pinned_sequence(zp, path, 24, tab);
    const auto y1 = path.at_step(1);
    CHECK(seq[1] == doctest::Approx(zp * tab.p(1, std::span<const int>(y1.data(), 4))).epsilon(1e-15));
    // Ž^{pin} = z'/(1+z') Ẑ^{pin} and the free route in d = 4, N = 24
    const auto p = discrete(4, 0.9);
    CHECK(seq[24] == doctest::Approx(zp / (1 + zp) * field_dp_partition(p, path, 24, true).value()).epsilon(1e-10));
    CHECK(renewal_dp_partition(p, path, 24, false, tab).value() ==
          doctest::Approx(field_dp_partition(p, path, 24, false).value()).epsilon(1e-10));
}

TEST_CASE("log partition is nondecreasing and convex in beta") {
    auto path = disorder::sample_discrete(2, 10, 77);
    std::vector<double> v;
    for (int k = 0; k <= 20; ++k) v.push_back(field_dp_partition(discrete(2, -1.0 + 0.15 * k), path, 10, false).log_value);
    for (std::size_t k = 1; k < v.size(); ++k) CHECK(v[k] >= v[k - 1] - 1e-12);
    for (std::size_t k = 1; k + 1 < v.size(); ++k) CHECK(v[k + 1] - 2 * v[k] + v[k - 1] >= -1e-9);
    // free dominates pinned
    for (double b : {-0.5, 0.0, 0.8})
        CHECK(field_dp_partition(discrete(2, b), path, 10, false).log_value >=
              field_dp_partition(discrete(2, b), path, 10, true).log_value);
}

TEST_CASE("continuous-time partition") {
    ModelParams p{Mode::continuous, 2, 0.0, 1.0};
    auto path = disorder::sample_ct(2, 1.0, 5.0, 4);
    CHECK(ct_partition(p, path, 5.0, 1e-10, false).log_value == doctest::Approx(0.0).epsilon(1e-12));

    // frozen catalyst against an eigendecomposition of the truncated generator
    ModelParams q{Mode::continuous, 1, 0.7, 0.0};
    auto still = disorder::sample_ct(1, 0.0, 3.0, 1);
    CHECK(ct_partition(q, still, 3.0, 1e-12, false).value() ==
          doctest::Approx(frozen_catalyst_oracle(0.7, 3.0, 40)).epsilon(1e-8));

    // monotone in t
    ModelParams r{Mode::continuous, 1, 0.5, 1.0};
    auto yp = disorder::sample_ct(1, 1.0, 8.0, 9);
    double prev = 0.0;
    for (double t : {1.0, 2.0, 4.0, 8.0}) {
        const double v = ct_partition(r, yp, t, 1e-10, false).log_value;
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    // first-order Taylor term: Z - 1 - β∫P(X_s = Y_s)ds = O(t²)
    ModelParams s{Mode::continuous, 1, 0.6, 0.0};
    auto rest = disorder::sample_ct(1, 0.0, 1.0, 2);
    auto residual = [&](double t) {
        // ∫_0^t e^{-s} I_0(s) ds by Simpson's rule
        const int n = 2000;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double u = t * i / n;
            const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
            acc += w * std::exp(-u) * std::cyl_bessel_i(0.0, u);
        }
        acc *= t / (3.0 * n);
        return ct_partition(s, rest, t, 1e-14, false).value() - 1.0 - 0.6 * acc;
    };
    const double r1 = residual(0.2), r2 = residual(0.1);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("modified continuous-time partitions") {
    ModelParams p{Mode::continuous, 3, 0.8, 0.5};
    auto path = disorder::sample_ct(3, 0.5, 4.0, 3);
    auto m1 = ct_modified_partitions(p, path, 4.0, 0.05);
    auto m2 = ct_modified_partitions(p, path, 4.0, 0.025);
    auto m3 = ct_modified_partitions(p, path, 4.0, 0.0125);
    const double zf = ct_partition(p, path, 4.0, 1e-12, false).value();
    const double zp = ct_partition(p, path, 4.0, 1e-12, true).value();
    CHECK(m3.free_full.value() == doctest::Approx(zf).epsilon(1e-4));
    CHECK(m3.pin_full.value() == doctest::Approx(zp).epsilon(1e-3));
    // Z̄ <= C Z̄¹
    CHECK(m3.free_full.value() <= m3.bound_C * m3.z1.value());
    // trapezoid order: successive differences shrink by about 4
    const double e1 = m1.pin2.value() - m2.pin2.value(), e2 = m2.pin2.value() - m3.pin2.value();
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
    // ρ = 0 with Y ≡ 0: w = β̄ exactly, so pin1 solves the homogeneous renewal equation
    ModelParams h{Mode::continuous, 3, 0.8, 0.0};
    auto still = disorder::sample_ct(3, 0.0, 4.0, 1);
    auto mh = ct_modified_partitions(h, still, 4.0, 0.02);
    auto mh2 = ct_modified_partitions(h, still, 4.0, 0.01);
    const double G = kernels::green_ct_value(3, 0.0);
    // pin1(t) = K(t) + β̄∫pin1(u)K(t-u)du, solved independently on the same grid
    const int n = 400;
    const double dt = 4.0 / n, bbar = 0.8 * G;
    const int zero[3] = {0, 0, 0};
    std::vector<double> K(n + 1), v(n + 1);
    for (int i = 0; i <= n; ++i) K[i] = kernels::ct_kernel_point(3, i * dt, std::span<const int>(zero, 3), 1e-15) / G;
    v[0] = K[0];
    for (int i = 1; i <= n; ++i) {
        double acc = 0.5 * v[0] * K[i];
        for (int j = 1; j < i; ++j) acc += v[j] * K[i - j];
        v[i] = (K[i] + bbar * dt * acc) / (1.0 - 0.5 * bbar * dt * K[0]);
    }
    CHECK(v[n] == doctest::Approx(mh2.pin1.value()).epsilon(1e-3));
    CHECK(mh.pin1.value() == doctest::Approx(mh2.pin1.value()).epsilon(1e-2));
}

TEST_CASE("free energy estimators") {
    // β = 0, d = 1: each replica is (1/N) log P(X_N = Y_N | Y)
    auto s = free_energy_samples(discrete(1, 0.0), 32, 20, 5);
    REQUIRE(s.size() == 20);
    for (std::size_t r = 0; r < s.size(); ++r) {
        auto path = disorder::sample_discrete(1, 64, 5, r);
        const int y = path.at_step(32)[0];
        const double mass = oracle::binom(32, (32 + y) / 2) / std::pow(2.0, 32);
        CHECK(s[r] == doctest::Approx(std::log(mass) / 32).epsilon(1e-10));
    }
    auto rep = free_energy_estimate(discrete(1, 0.5), 64, 60, 3);
    CHECK(rep.superadditive_ok);
    CHECK(rep.at_2N.mean > rep.at_N.mean - 3 * (rep.at_N.stderr_ + rep.at_2N.stderr_));
}

TEST_CASE("collision local time") {
    auto rep = collision_mc(Mode::discrete, 3, 0.0, 50, 4000, 6);
    auto series = kernels::pair_return_series(3, 50);
    double expected = 0.0;
    for (int n = 1; n <= 50; ++n) expected += series[n];
    CHECK(std::fabs(rep.mean.mean - expected) < 3 * rep.mean.stderr_);
    auto ct = collision_mc(Mode::continuous, 1, 0.0, 2.0, 500, 7);
    for (double L : ct.samples) {
        CHECK(L >= 0.0);
        CHECK(L <= 2.0 + 1e-12);
    }
    // transience in d = 3: the mean stops growing
    auto a = collision_mc(Mode::continuous, 3, 1.0, 50.0, 1500, 8);
    auto b = collision_mc(Mode::continuous, 3, 1.0, 100.0, 1500, 8);
    CHECK(std::fabs(b.mean.mean - a.mean.mean) < 3 * std::hypot(a.mean.stderr_, b.mean.stderr_) + 0.05 * a.mean.mean);
}

} // TEST_SUITE
