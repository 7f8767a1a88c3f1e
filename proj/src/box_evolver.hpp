#pragma once

// Uniformization of v' = (Δ + β δ_y) v on an L∞ cube, where Δ is the
// generator of the rate-1 simple random walk. Shared by the continuous-time
// partition functions and the PAM solver.

#include "pinlab/common.hpp"
#include "pinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pinlab::detail {

class BoxEvolver {
public:
    // Cube [-R, R]^d. With `frozen_exterior` the exterior is held at the
    // value of an extra state (index size()), which the dynamics keep
    // constant; otherwise the exterior is absorbing (value 0).
    BoxEvolver(int d, int R, bool frozen_exterior) : d_(d), R_(R), frozen_(frozen_exterior) {
        side_ = 2 * R + 1;
        stride_.assign(d, 1);
        for (int i = 1; i < d; ++i) stride_[i] = stride_[i - 1] * side_;
        n_ = 1;
        for (int i = 0; i < d; ++i) n_ *= side_;
        coord_.assign(n_ * d, 0);
        for (std::size_t s = 0; s < n_; ++s) {
            std::size_t r = s;
            for (int i = 0; i < d; ++i) {
                coord_[s * d + i] = static_cast<int>(r % side_) - R;
                r /= side_;
            }
        }
    }

    std::size_t size() const { return n_; }
    std::size_t state_size() const { return n_ + (frozen_ ? 1 : 0); }
    int radius() const { return R_; }

    // Index of x, or -1 when outside the cube.
    long index(const int* x) const {
        long s = 0;
        for (int i = 0; i < d_; ++i) {
            if (x[i] < -R_ || x[i] > R_) return -1;
            s += static_cast<long>(x[i] + R_) * stride_[i];
        }
        return s;
    }

    // Advances v over a time span tau with the potential at `site` (-1 for
    // none). `log_scale` accumulates rescalings: the true state is
    // v * exp(log_scale). The truncation error added to `log_err` is an
    // absolute bound in the chosen norm (l1 or sup) of the true state.
    void evolve(std::vector<double>& v, double& log_scale, double tau, long site, double beta, double log_tail,
                bool sup_norm, double& log_err, double remaining_after) const {
        const double c = 1.0 + std::max(0.0, -beta);
        const double bp = std::max(0.0, beta);
        const double lam = c + bp;
        const double max_sub = 4.0 / lam;
        const int nsub = std::max(1, static_cast<int>(std::ceil(tau / max_sub)));
        const double h = tau / nsub;
        const double mu = lam * h;
        const long K = std::max<long>(1, special::poisson_upper(mu, std::exp(log_tail)));
        const double log_tail_actual = special::log_poisson_sf(mu, K);
        std::vector<double> w(v.size()), nw(v.size()), acc(v.size());
        std::vector<double> pw(K + 1);
        pw[0] = std::exp(-mu);
        for (long k = 1; k <= K; ++k) pw[k] = pw[k - 1] * mu / k;
        for (int sub = 0; sub < nsub; ++sub) {
            const double nrm = norm(v, sup_norm);
            if (nrm > 0.0) {
                const double rem = remaining_after + (nsub - sub - 1) * h;
                log_err = log_add(log_err, log_scale + std::log(nrm) + log_tail_actual + bp * h + bp * rem);
            }
            w = v;
            for (std::size_t i = 0; i < v.size(); ++i) acc[i] = pw[0] * w[i];
            for (long k = 1; k <= K; ++k) {
                apply(w, nw, site, beta, c, lam);
                w.swap(nw);
                for (std::size_t i = 0; i < v.size(); ++i) acc[i] += pw[k] * w[i];
            }
            v.swap(acc);
            log_scale += (lam - c) * h;
            const double m = *std::max_element(v.begin(), v.end());
            if (m > 1e200 || (m > 0.0 && m < 1e-200)) {
                for (auto& x : v) x /= m;
                log_scale += std::log(m);
            }
        }
    }

private:
    static double norm(const std::vector<double>& v, bool sup) {
        double s = 0.0;
        for (double x : v) s = sup ? std::max(s, std::fabs(x)) : s + std::fabs(x);
        return s;
    }

    // out = (B / lam) in, B = P_box + (c-1) I + β δ_site (+ exterior feed)
    void apply(const std::vector<double>& in, std::vector<double>& out, long site, double beta, double c,
               double lam) const {
        const double q = 1.0 / (2.0 * d_);
        const double ext = frozen_ ? in[n_] : 0.0;
        for (std::size_t s = 0; s < n_; ++s) {
            double acc = (c - 1.0) * in[s];
            const int* x = &coord_[s * d_];
            for (int i = 0; i < d_; ++i) {
                acc += q * (x[i] > -R_ ? in[s - stride_[i]] : ext);
                acc += q * (x[i] < R_ ? in[s + stride_[i]] : ext);
            }
            if (static_cast<long>(s) == site) acc += beta * in[s];
            out[s] = acc / lam;
        }
        if (frozen_) out[n_] = c * in[n_] / lam;
    }

    int d_, R_;
    bool frozen_;
    int side_ = 1;
    std::vector<long> stride_;
    std::size_t n_ = 1;
    std::vector<int> coord_;
};

} // namespace pinlab::detail
