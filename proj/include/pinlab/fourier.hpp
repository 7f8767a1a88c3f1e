#pragma once

// Averages over the torus [-π, π]^d of integrands with integrable |k|^{-2}
// singularities at k = 0 and, optionally, at the corner k = (π, ..., π).
//
// The integrand is split with a smooth radial cut-off χ. Away from the
// singular points the product (1 - χ) f is smooth and periodic, so the
// trapezoid rule converges quickly; inside the cut-off balls the integral is
// taken in hyperspherical coordinates, where the factor r^{d-1} cancels the
// singularity and Gauss–Legendre works well.
//
// Requirements on f: f(k) depends on k only through |k_i| (evenness in every
// coordinate) and is invariant under permutations of the coordinates. When
// `corner` is true, f must also satisfy f(k + π·1) = f(k) so that the corner
// ball contributes the same as the origin ball. f is called with
// coordinates in [0, π].

#include "pinlab/common.hpp"
#include "pinlab/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace pinlab::fourier {

struct Options {
    int grid = 96;          // trapezoid points per dimension (even)
    int radial_nodes = 48;  // Gauss–Legendre nodes on the cut-off transition
    int angular_nodes = 14; // Gauss–Legendre nodes per hyperspherical angle
    double r_inner = 0.6;
    double r_outer = 2.4;
};

inline double cutoff(double r, double a, double b) {
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    const double x = (b - r) / (b - a);
    const double e0 = std::exp(-1.0 / x), e1 = std::exp(-1.0 / (1.0 - x));
    return e0 / (e0 + e1);
}

namespace detail {

template <typename F>
double smooth_part(int d, F& f, bool corner, const Options& o) {
    const int M = o.grid;
    const int H = M / 2;
    const double pi = std::numbers::pi;
    std::vector<double> kval(H + 1), wj(H + 1);
    for (int j = 0; j <= H; ++j) {
        kval[j] = 2.0 * pi * j / M;
        wj[j] = (j == 0 || j == H) ? 1.0 : 2.0;
    }
    double fact[8] = {1, 1, 2, 6, 24, 120, 720, 5040};
    // Nondecreasing index tuples, grouped by the first index for parallelism.
    std::vector<double> partial(H + 1, 0.0);
    parallel_for(static_cast<std::size_t>(H + 1), [&](std::size_t first) {
        std::array<int, 8> idx{};
        std::array<double, 8> k{};
        idx[0] = static_cast<int>(first);
        std::vector<double> terms;
        // iterate the remaining d-1 indices in nondecreasing order >= first
        for (int i = 1; i < d; ++i) idx[i] = idx[0];
        for (;;) {
            double w = 1.0;
            double r0 = 0.0, rc = 0.0;
            for (int i = 0; i < d; ++i) {
                k[i] = kval[idx[i]];
                w *= wj[idx[i]];
                r0 += k[i] * k[i];
                rc += (pi - k[i]) * (pi - k[i]);
            }
            double mult = fact[d];
            int run = 1;
            for (int i = 1; i <= d; ++i) {
                if (i < d && idx[i] == idx[i - 1]) {
                    ++run;
                } else {
                    mult /= fact[run];
                    run = 1;
                }
            }
            double keep = 1.0 - cutoff(std::sqrt(r0), o.r_inner, o.r_outer);
            if (corner) keep -= cutoff(std::sqrt(rc), o.r_inner, o.r_outer);
            if (keep > 0.0) terms.push_back(mult * w * keep * f(k.data()));
            // advance
            int p = d - 1;
            while (p >= 1 && idx[p] == H) --p;
            if (p < 1) break;
            ++idx[p];
            for (int q = p + 1; q < d; ++q) idx[q] = idx[p];
        }
        partial[first] = pairwise_sum(terms);
    });
    return pairwise_sum(partial) / std::pow(static_cast<double>(M), d);
}

template <typename F>
double ball_part(int d, F& f, const Options& o) {
    const double pi = std::numbers::pi;
    // radial nodes: [0, a] (cut-off identically 1) and [a, b]
    auto q1 = special::gauss_legendre(std::max(8, o.radial_nodes / 2), 0.0, o.r_inner);
    auto q2 = special::gauss_legendre(o.radial_nodes, o.r_inner, o.r_outer);
    std::vector<double> rx, rw;
    for (std::size_t i = 0; i < q1.x.size(); ++i) {
        rx.push_back(q1.x[i]);
        rw.push_back(q1.w[i]);
    }
    for (std::size_t i = 0; i < q2.x.size(); ++i) {
        rx.push_back(q2.x[i]);
        rw.push_back(q2.w[i] * cutoff(q2.x[i], o.r_inner, o.r_outer));
    }
    auto qa = special::gauss_legendre(o.angular_nodes, 0.0, pi / 2.0);
    const int na = static_cast<int>(qa.x.size());
    const int nang = d - 1;
    std::size_t ndir = 1;
    for (int i = 0; i < nang; ++i) ndir *= static_cast<std::size_t>(na);

    std::vector<double> partial(ndir, 0.0);
    parallel_for(ndir, [&](std::size_t di) {
        std::array<double, 8> om{}, k{};
        double jac = 1.0;
        double sprod = 1.0;
        std::size_t rem = di;
        for (int i = 0; i < nang; ++i) {
            const int a = static_cast<int>(rem % na);
            rem /= na;
            const double th = qa.x[a];
            om[i] = sprod * std::cos(th);
            jac *= qa.w[a] * std::pow(std::sin(th), nang - 1 - i);
            sprod *= std::sin(th);
        }
        om[nang] = sprod;
        double s = 0.0;
        for (std::size_t j = 0; j < rx.size(); ++j) {
            const double r = rx[j];
            for (int i = 0; i < d; ++i) k[i] = r * om[i];
            s += rw[j] * std::pow(r, d - 1) * f(k.data());
        }
        partial[di] = jac * s;
    });
    return std::pow(2.0, d) * pairwise_sum(partial) / std::pow(2.0 * pi, d);
}

} // namespace detail

// (2π)^{-d} ∫_{[-π,π]^d} f(k) dk
template <typename F>
double torus_average(int d, F f, bool corner, const Options& o) {
    if (d < 2 || d > 6) throw InvalidArgument("torus_average: d must be in [2, 6]");
    if (o.grid % 2 != 0) throw InvalidArgument("torus_average: grid must be even");
    const double smooth = detail::smooth_part(d, f, corner, o);
    const double ball = detail::ball_part(d, f, o);
    return smooth + (corner ? 2.0 : 1.0) * ball;
}

// Exact average of a trigonometric polynomial whose degree per coordinate is
// below `grid`: plain trapezoid rule with the same symmetry reduction.
// f(k) returns a vector of values (one per requested quantity).
template <typename F>
std::vector<double> trig_poly_average(int d, int grid, int nout, F f) {
    const int H = grid / 2;
    const double pi = std::numbers::pi;
    std::vector<double> kval(H + 1), wj(H + 1);
    for (int j = 0; j <= H; ++j) {
        kval[j] = 2.0 * pi * j / grid;
        wj[j] = (j == 0 || j == H) ? 1.0 : 2.0;
    }
    double fact[8] = {1, 1, 2, 6, 24, 120, 720, 5040};
    std::vector<std::vector<double>> partial(H + 1, std::vector<double>(nout, 0.0));
    parallel_for(static_cast<std::size_t>(H + 1), [&](std::size_t first) {
        std::array<int, 8> idx{};
        std::array<double, 8> k{};
        idx[0] = static_cast<int>(first);
        for (int i = 1; i < d; ++i) idx[i] = idx[0];
        std::vector<double> out(nout);
        std::vector<double> acc(nout, 0.0);
        for (;;) {
            double w = 1.0;
            for (int i = 0; i < d; ++i) {
                k[i] = kval[idx[i]];
                w *= wj[idx[i]];
            }
            double mult = fact[d];
            int run = 1;
            for (int i = 1; i <= d; ++i) {
                if (i < d && idx[i] == idx[i - 1]) {
                    ++run;
                } else {
                    mult /= fact[run];
                    run = 1;
                }
            }
            f(k.data(), out.data());
            for (int q = 0; q < nout; ++q) acc[q] += mult * w * out[q];
            int p = d - 1;
            while (p >= 1 && idx[p] == H) --p;
            if (p < 1) break;
            ++idx[p];
            for (int q = p + 1; q < d; ++q) idx[q] = idx[p];
        }
        partial[first] = acc;
    });
    std::vector<double> res(nout, 0.0);
    const double norm = std::pow(static_cast<double>(grid), d);
    for (int q = 0; q < nout; ++q) {
        std::vector<double> col(H + 1);
        for (int j = 0; j <= H; ++j) col[j] = partial[j][q];
        res[q] = pairwise_sum(col) / norm;
    }
    return res;
}

} // namespace pinlab::fourier
