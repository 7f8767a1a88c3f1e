#include "pinlab/quenched.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/special.hpp"

#include "box_evolver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace pinlab::quenched {

const char* to_string(Variant v) {
    switch (v) {
    case Variant::free: return "free";
    case Variant::pin: return "pin";
    case Variant::pin1: return "pin1";
    case Variant::pin2: return "pin2";
    case Variant::z1: return "z1";
    }
    return "?";
}

double ModelParams::coupling() const {
    if (d <= 2) return INFINITY;
    if (mode == Mode::discrete) return z_prime() * kernels::green_pair_value(d);
    return beta * kernels::green_ct_value(d, rho);
}

namespace {

void check_discrete(const ModelParams& p, const DisorderPath& path, long N, const char* who) {
    if (p.mode != Mode::discrete) throw InvalidArgument(std::string(who) + ": discrete mode required");
    if (path.d != p.d) throw InvalidArgument(std::string(who) + ": path dimension does not match d");
    if (N < 0 || static_cast<std::size_t>(N) > path.steps.size())
        throw InvalidArgument(std::string(who) + ": path shorter than N");
}

PartitionValue make_value(const ModelParams& p, Variant v, double lo, double hi, double logv, const char* route) {
    PartitionValue r;
    r.params = p;
    r.variant = v;
    r.window_lo = lo;
    r.window_hi = hi;
    r.log_value = logv;
    r.route = route;
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Enumeration: count walks by their collision number.

PartitionValue enumerate_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained) {
    check_discrete(p, path, N, "enumerate_partition");
    const int d = p.d;
    const double paths = std::pow(2.0 * d, static_cast<double>(N));
    if (paths > 1e7) {
        std::ostringstream os;
        os << "enumerate_partition: (2d)^N = " << paths << " exceeds 1e7 (d=" << d << ", N=" << N << ")";
        throw InstanceTooLarge(os.str());
    }
    // no reward: E^X[1] = 1 without summing (2d)^N rounded terms
    if (p.beta == 0.0 && !constrained) return make_value(p, Variant::free, 0, static_cast<double>(N), 0.0, "enumeration");
    const auto Y = path.positions();
    std::vector<double> count(N + 1, 0.0); // walks by collision count
    std::vector<int> x(d, 0);
    // iterative DFS over step codes
    std::vector<int> code(N, -1);
    std::vector<int> coll(N + 1, 0);
    long depth = 0;
    if (N == 0) {
        count[0] = 1.0;
    } else {
        while (depth >= 0) {
            if (depth == N) {
                bool ok = true;
                if (constrained)
                    for (int i = 0; i < d; ++i) ok = ok && x[i] == Y[N * d + i];
                if (ok) count[coll[N]] += 1.0;
                --depth;
                continue;
            }
            if (code[depth] >= 0) {
                const int c = code[depth];
                x[c >> 1] -= (c & 1) ? -1 : 1;
            }
            if (++code[depth] == 2 * d) {
                code[depth] = -1;
                --depth;
                continue;
            }
            const int c = code[depth];
            x[c >> 1] += (c & 1) ? -1 : 1;
            bool hit = true;
            for (int i = 0; i < d; ++i) hit = hit && x[i] == Y[(depth + 1) * d + i];
            coll[depth + 1] = coll[depth] + (hit ? 1 : 0);
            ++depth;
        }
    }
    double m = -INFINITY;
    for (long l = 0; l <= N; ++l)
        if (count[l] > 0) m = std::max(m, std::log(count[l]) + p.beta * l);
    std::vector<double> terms;
    for (long l = 0; l <= N; ++l)
        if (count[l] > 0) terms.push_back(std::exp(std::log(count[l]) + p.beta * l - m));
    const double logv = m + std::log(pairwise_sum(terms)) - N * std::log(2.0 * d);
    return make_value(p, constrained ? Variant::pin : Variant::free, 0, static_cast<double>(N), logv, "enumeration");
}

// ---------------------------------------------------------------------------
// Weight-field transfer.

PartitionValue field_dp_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained,
                                  std::size_t budget) {
    check_discrete(p, path, N, "field_dp_partition");
    const int d = p.d;
    const long side = 2 * N + 1;
    double cells = std::pow(static_cast<double>(side), d);
    if (cells > static_cast<double>(budget)) {
        std::ostringstream os;
        os << "field_dp_partition: box of " << cells << " sites exceeds budget " << budget << " (d=" << d
           << ", N=" << N << ")";
        throw BudgetExceeded(os.str());
    }
    const std::size_t n = static_cast<std::size_t>(cells);
    std::vector<long> stride(d, 1);
    for (int i = 1; i < d; ++i) stride[i] = stride[i - 1] * side;
    auto idx = [&](const int* x) {
        long s = 0;
        for (int i = 0; i < d; ++i) s += (x[i] + N) * stride[i];
        return s;
    };
    std::vector<int> coord(n * d);
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t r = s;
        for (int i = 0; i < d; ++i) {
            coord[s * d + i] = static_cast<int>(r % side) - static_cast<int>(N);
            r /= side;
        }
    }
    const auto Y = path.positions();
    std::vector<double> u(n, 0.0), nu(n, 0.0);
    std::vector<int> zero(d, 0);
    u[idx(zero.data())] = 1.0;
    double log_scale = 0.0;
    const double q = 1.0 / (2.0 * d);
    const double eb = std::exp(p.beta);
    const double big = std::exp(300.0);
    for (long step = 1; step <= N; ++step) {
        // only sites with |x|_1 <= step and matching parity can be nonzero
        for (std::size_t s = 0; s < n; ++s) {
            const int* x = &coord[s * d];
            int l1 = 0;
            for (int i = 0; i < d; ++i) l1 += std::abs(x[i]);
            if (l1 > step || ((l1 ^ step) & 1)) {
                nu[s] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (int i = 0; i < d; ++i) {
                if (x[i] > -N) acc += u[s - stride[i]];
                if (x[i] < N) acc += u[s + stride[i]];
            }
            nu[s] = q * acc;
        }
        nu[idx(&Y[step * d])] *= eb;
        u.swap(nu);
        double mx = 0.0;
        for (double v : u) mx = std::max(mx, v);
        if (mx > big || (mx > 0.0 && mx < 1.0 / big)) {
            for (auto& v : u) v /= mx;
            log_scale += std::log(mx);
        }
    }
    double val;
    if (constrained) {
        val = u[idx(&Y[N * d])];
    } else {
        val = pairwise_sum(u);
    }
    return make_value(p, constrained ? Variant::pin : Variant::free, 0, static_cast<double>(N),
                      std::log(val) + log_scale, "field_dp");
}

// ---------------------------------------------------------------------------
// Renewal recursion.

namespace {

// ũ_j = e^{-cj} u_j, u_j = p_j(Y_j) + z' Σ_{i<j} u_i p_{j-i}(Y_j - Y_i).
std::vector<double> tilted_u(double zp, double c, const std::vector<int>& Y, int d, long N,
                             const kernels::KernelTable& tab) {
    if (tab.n_max() < N) throw InvalidArgument("renewal recursion: kernel table does not cover N");
    std::vector<double> u(N + 1, 0.0);
    std::vector<double> ec(N + 1);
    for (long j = 0; j <= N; ++j) ec[j] = std::exp(-c * j);
    std::vector<int> diff(d);
    std::vector<double> terms;
    for (long j = 1; j <= N; ++j) {
        terms.clear();
        terms.push_back(ec[j] * tab.p(static_cast<int>(j), std::span<const int>(&Y[j * d], d)));
        for (long i = 1; i < j; ++i) {
            if (u[i] == 0.0) continue;
            for (int a = 0; a < d; ++a) diff[a] = Y[j * d + a] - Y[i * d + a];
            const double k = tab.p(static_cast<int>(j - i), diff);
            if (k != 0.0) terms.push_back(zp * u[i] * ec[j - i] * k);
        }
        u[j] = pairwise_sum(terms);
    }
    return u;
}

} // namespace

std::vector<double> pinned_sequence(double zp, const DisorderPath& path, long N, const kernels::KernelTable& tab) {
    if (N < 0 || static_cast<std::size_t>(N) > path.steps.size())
        throw InvalidArgument("pinned_sequence: path shorter than N");
    auto u = tilted_u(zp, 0.0, path.positions(), path.d, N, tab);
    u[0] = 1.0;
    for (long j = 1; j <= N; ++j) u[j] *= zp;
    return u;
}

PartitionValue renewal_dp_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained,
                                    const kernels::KernelTable& tab) {
    check_discrete(p, path, N, "renewal_dp_partition");
    const double zp = p.z_prime();
    const double c = std::max(p.beta, 0.0);
    const auto u = tilted_u(zp, c, path.positions(), p.d, N, tab);
    double logv;
    if (constrained) {
        if (N == 0) {
            logv = 0.0;
        } else {
            logv = p.beta + std::log(u[N]) + c * N;
        }
    } else if (p.beta >= 0.0) {
        double m = 0.0;
        std::vector<double> lt;
        for (long j = 1; j <= N; ++j) {
            if (u[j] <= 0.0 || zp == 0.0) continue;
            lt.push_back(std::log(zp) + std::log(u[j]) + c * j);
            m = std::max(m, lt.back());
        }
        std::vector<double> terms{std::exp(-m)};
        for (double l : lt) terms.push_back(std::exp(l - m));
        logv = m + std::log(pairwise_sum(terms));
    } else {
        std::vector<double> terms(u.begin() + 1, u.end());
        logv = std::log1p(zp * pairwise_sum(terms));
    }
    return make_value(p, constrained ? Variant::pin : Variant::free, 0, static_cast<double>(N), logv, "renewal_dp");
}

PartitionValue renewal_dp_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained) {
    auto tab = kernels::kernel_table(p.d, static_cast<int>(std::max<long>(N, 1)));
    return renewal_dp_partition(p, path, N, constrained, *tab);
}

// ---------------------------------------------------------------------------
// Continuous time.

namespace {

struct CtResult {
    std::vector<double> log_values;
    std::vector<double> log_errors;
    int radius = 0;
};

// Values at each checkpoint time (sorted, <= path horizon).
CtResult ct_values(const ModelParams& p, const DisorderPath& path, const std::vector<double>& checkpoints,
                   bool constrained, double log_guess, double eps) {
    const int d = p.d;
    const double t = checkpoints.back();
    const double bp = std::max(0.0, p.beta);
    // box: exits need more than R jumps of X
    const double log_box_target = std::log(eps) - std::log(4.0) - bp * t + log_guess;
    long R = t > 0.0 ? special::poisson_upper(t, std::exp(std::max(log_box_target, -700.0))) : 0;
    if (log_box_target < -700.0) {
        while (special::log_poisson_sf(t, R) > log_box_target) R += std::max<long>(1, R / 8);
    }
    const auto pos = path.positions();
    int ymax = 0;
    for (int v : pos) ymax = std::max(ymax, std::abs(v));
    R = std::max<long>(R, ymax + 1);
    detail::BoxEvolver box(d, static_cast<int>(R), false);
    const double lam = 1.0 + std::max(0.0, -p.beta) + bp;
    const double n_sub = std::ceil(lam * t / 4.0) + static_cast<double>(path.times.size()) + 1.0;
    const double log_tail = std::log(eps) - std::log(4.0) - bp * t + log_guess - std::log(n_sub);

    std::vector<double> v(box.state_size(), 0.0);
    std::vector<int> zero(d, 0);
    v[box.index(zero.data())] = 1.0;
    double log_scale = 0.0, log_err = -INFINITY;
    CtResult res;
    res.radius = static_cast<int>(R);
    double now = 0.0;
    std::size_t jump = 0;
    for (double target : checkpoints) {
        while (now < target) {
            double next = target;
            if (jump < path.times.size() && path.times[jump] < next) next = path.times[jump];
            const long site = box.index(&pos[jump * d]);
            box.evolve(v, log_scale, next - now, site, p.beta, log_tail, false, log_err, t - next);
            now = next;
            if (jump < path.times.size() && path.times[jump] <= now) ++jump;
        }
        while (jump < path.times.size() && path.times[jump] <= now) ++jump;
        double val;
        if (constrained) {
            const long s = box.index(&pos[jump * d]);
            val = s >= 0 ? v[s] : 0.0;
        } else {
            val = pairwise_sum(v);
        }
        const double box_err = bp * target + special::log_poisson_sf(target, R);
        res.log_values.push_back(std::log(val) + log_scale);
        res.log_errors.push_back(log_add(log_err, box_err));
    }
    return res;
}

} // namespace

PartitionValue ct_partition(const ModelParams& p, const DisorderPath& path, double t, double eps, bool constrained) {
    if (p.mode != Mode::continuous) throw InvalidArgument("ct_partition: continuous mode required");
    if (path.d != p.d) throw InvalidArgument("ct_partition: path dimension does not match d");
    if (!(eps > 0.0)) throw InvalidArgument("ct_partition: eps must be > 0");
    if (!(t >= 0.0) || t > path.horizon + 1e-12) throw InvalidArgument("ct_partition: t outside the path horizon");
    if (p.beta == 0.0 && !constrained) return make_value(p, Variant::free, 0, t, 0.0, "uniformization");
    double log_guess = std::min(p.beta, 0.0) * t;
    if (constrained) log_guess += -0.5 * p.d * std::log1p(t) - std::log(1e3);
    for (int attempt = 0; attempt < 4; ++attempt) {
        auto r = ct_values(p, path, {t}, constrained, log_guess, eps);
        const double lv = r.log_values[0], le = r.log_errors[0];
        if (le <= std::log(eps) + lv) {
            auto out = make_value(p, constrained ? Variant::pin : Variant::free, 0, t, lv, "uniformization");
            out.error_bound = std::exp(le);
            return out;
        }
        if (!std::isfinite(lv)) break;
        log_guess = std::min(log_guess, lv) - std::log(10.0) - (le - lv - std::log(eps));
    }
    std::ostringstream os;
    os << "ct_partition: truncation bound not below eps=" << eps;
    throw ToleranceNotMet(os.str(), eps);
}

// ---------------------------------------------------------------------------
// Volterra recursions for the modified partitions.

ModifiedPartitions ct_modified_partitions(const ModelParams& p, const DisorderPath& path, double t, double dt) {
    if (p.mode != Mode::continuous) throw InvalidArgument("ct_modified_partitions: continuous mode required");
    if (p.d < 3) throw InvalidArgument("ct_modified_partitions: needs d >= 3 (finite G_{1+rho})");
    if (!(dt > 0.0) || !(t > 0.0)) throw InvalidArgument("ct_modified_partitions: need t > 0 and dt > 0");
    if (t > path.horizon + 1e-12) throw InvalidArgument("ct_modified_partitions: t outside the path horizon");
    const int d = p.d;
    const double G = kernels::green_ct_value(d, p.rho);
    const double beta = p.beta;

    // nodes: uniform grid merged with jump times in (0, t)
    const long nu = std::max<long>(1, static_cast<long>(std::llround(t / dt)));
    const double h = t / nu;
    std::vector<double> s;
    std::vector<long> uidx; // uniform index or -1
    std::size_t jp = 0;
    for (long k = 0; k <= nu; ++k) {
        const double sk = k == nu ? t : k * h;
        while (jp < path.times.size() && path.times[jp] < sk) {
            if (path.times[jp] > 0.0 && (s.empty() || path.times[jp] > s.back())) {
                s.push_back(path.times[jp]);
                uidx.push_back(-1);
            }
            ++jp;
        }
        if (!s.empty() && sk <= s.back()) continue;
        s.push_back(sk);
        uidx.push_back(k);
    }
    const std::size_t n = s.size();
    // Y on [s_k, s_{k+1})
    const auto pos = path.positions();
    std::vector<int> ypos(n * d);
    {
        std::size_t j = 0;
        for (std::size_t k = 0; k < n; ++k) {
            while (j < path.times.size() && path.times[j] <= s[k]) ++j;
            std::copy_n(&pos[j * d], d, &ypos[k * d]);
        }
    }
    // 1-d kernels on uniform lags
    int mmax = 0;
    for (int v : pos) mmax = std::max(mmax, 2 * std::abs(v));
    std::vector<std::vector<double>> lag1d(nu + 1);
    for (long l = 0; l <= nu; ++l) {
        auto lk = kernels::log_kernel_1d(l * h / d, mmax);
        lag1d[l].resize(mmax + 1);
        for (int m = 0; m <= mmax; ++m) lag1d[l][m] = std::exp(lk[m]);
    }
    auto pker = [&](std::size_t a, std::size_t b, const int* y) {
        // p_{s_a - s_b}(y)
        if (uidx[a] >= 0 && uidx[b] >= 0) {
            const auto& v = lag1d[uidx[a] - uidx[b]];
            double r = 1.0;
            for (int i = 0; i < d; ++i) {
                const int m = std::abs(y[i]);
                if (m > mmax) return kernels::ct_kernel_fast(d, s[a] - s[b], y);
                r *= v[m];
            }
            return r;
        }
        return kernels::ct_kernel_fast(d, s[a] - s[b], y);
    };
    const double r1 = 1.0 + p.rho;
    std::vector<int> zero(d, 0), yd(d);
    // K_{1+ρ}(t - s_j)
    auto kern = [&](std::size_t a, std::size_t b) {
        if (r1 == 1.0 && uidx[a] >= 0 && uidx[b] >= 0) return std::pow(lag1d[uidx[a] - uidx[b]][0], d) / G;
        return kernels::ct_kernel_fast(d, r1 * (s[a] - s[b]), zero.data()) / G;
    };
    std::vector<double> K(n);
    for (std::size_t k = 0; k < n; ++k) K[k] = kern(k, 0);
    // minus / plus limits of pin1 and the full pinned density zp
    std::vector<double> p1m(n), p1p(n), zpm(n), zpp(n);
    p1m[0] = p1p[0] = K[0];
    zpm[0] = zpp[0] = beta;
    auto solve = [&](std::size_t m, const int* yt, bool implicit, double& p1, double& zp) {
        double a1 = 0.0, az = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double w = 0.5 * (s[k + 1] - s[k]);
            for (int i = 0; i < d; ++i) yd[i] = yt[i] - ypos[k * d + i];
            const double kl = beta * pker(m, k, yd.data());
            a1 += w * p1p[k] * kl;
            az += w * zpp[k] * kl;
            if (k + 1 < m) {
                const double kr = beta * pker(m, k + 1, yd.data());
                a1 += w * p1m[k + 1] * kr;
                az += w * zpm[k + 1] * kr;
            }
        }
        const double w_end = 0.5 * (s[m] - s[m - 1]);
        const double self = implicit ? beta * w_end : 0.0;
        p1 = (K[m] + a1) / (1.0 - self);
        zp = (beta * pker(m, 0, yt) + az) / (1.0 - self);
    };
    for (std::size_t m = 1; m < n; ++m) {
        const int* yminus = &ypos[(m - 1) * d];
        const int* yplus = &ypos[m * d];
        solve(m, yminus, true, p1m[m], zpm[m]);
        if (std::equal(yminus, yminus + d, yplus)) {
            p1p[m] = p1m[m];
            zpp[m] = zpm[m];
        } else {
            // the endpoint term vanishes: p_0 of a unit jump is 0
            solve(m, yplus, false, p1p[m], zpp[m]);
        }
    }
    // pin2 = K(t) + ∫ pin1(u) K(t-u) du; Z^1 = 1 + ∫ pin1; Z = 1 + ∫ zp
    double pin2 = K[n - 1], z1 = 1.0, zfree = 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double w = 0.5 * (s[k + 1] - s[k]);
        pin2 += w * (p1p[k] * kern(n - 1, k) + p1m[k + 1] * kern(n - 1, k + 1));
        z1 += w * (p1p[k] + p1m[k + 1]);
        zfree += w * (zpp[k] + zpm[k + 1]);
    }
    ModifiedPartitions out;
    out.g_ct = G;
    out.nodes = n;
    const double bbar = beta * G;
    out.z1 = make_value(p, Variant::z1, 0, t, std::log(z1), "volterra");
    out.pin1 = make_value(p, Variant::pin1, 0, t, std::log(p1p[n - 1]), "volterra");
    out.pin2 = make_value(p, Variant::pin2, 0, t, std::log(pin2), "volterra");
    out.free_full = make_value(p, Variant::free, 0, t, std::log(zfree), "volterra");
    out.pin_full = make_value(p, Variant::pin, 0, t, std::log(zpp[n - 1] / beta), "volterra");
    // C = β̄ sup_s p_s(0)/p_{(1+ρ)s}(0); the ratio tends to (1+ρ)^{d/2}
    double sup = std::pow(r1, d / 2.0);
    for (double u = 1e-3; u < 1e5; u *= 1.1) {
        const double a = kernels::ct_kernel_fast(d, u, zero.data());
        const double b = kernels::ct_kernel_fast(d, r1 * u, zero.data());
        if (b > 0.0) sup = std::max(sup, a / b);
    }
    out.bound_C = bbar * sup;
    return out;
}

// ---------------------------------------------------------------------------
// Free energy and collision statistics.

namespace {

double log_pinned_discrete(const ModelParams& p, const DisorderPath& path, long N) {
    const double field_cost = N * std::pow(2.0 * N + 1.0, p.d);
    const double renewal_cost = 10.0 * N * N;
    if (field_cost <= renewal_cost) return field_dp_partition(p, path, N, true).log_value;
    return renewal_dp_partition(p, path, N, true).log_value;
}

std::pair<double, double> pinned_pair(const ModelParams& p, double H, std::uint64_t seed, std::uint64_t r,
                                      double eps) {
    if (p.mode == Mode::discrete) {
        const long N = static_cast<long>(H);
        auto path = disorder::sample_discrete(p.d, 2 * N, seed, r);
        return {log_pinned_discrete(p, path, N), log_pinned_discrete(p, path, 2 * N)};
    }
    auto path = disorder::sample_ct(p.d, p.rho, 2 * H, seed, r);
    return {ct_partition(p, path, H, eps, true).log_value, ct_partition(p, path, 2 * H, eps, true).log_value};
}

} // namespace

std::vector<double> free_energy_samples(const ModelParams& p, double H, std::size_t replicas, std::uint64_t seed,
                                        double eps) {
    if (!(H > 0.0)) throw InvalidArgument("free_energy_samples: horizon must be > 0");
    std::vector<double> out(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        if (p.mode == Mode::discrete) {
            const long N = static_cast<long>(H);
            auto path = disorder::sample_discrete(p.d, N, seed, r);
            out[r] = log_pinned_discrete(p, path, N) / N;
        } else {
            auto path = disorder::sample_ct(p.d, p.rho, H, seed, r);
            out[r] = ct_partition(p, path, H, eps, true).log_value / H;
        }
    });
    return out;
}

FreeEnergyReport free_energy_estimate(const ModelParams& p, double H, std::size_t replicas, std::uint64_t seed,
                                      double eps) {
    if (!(H > 0.0)) throw InvalidArgument("free_energy_estimate: horizon must be > 0");
    if (p.mode == Mode::discrete && H != std::floor(H)) throw InvalidArgument("free_energy_estimate: N must be an integer");
    if (replicas < 2) throw InvalidArgument("free_energy_estimate: need at least 2 replicas");
    std::vector<double> a(replicas), b(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        auto v = pinned_pair(p, H, seed, r, eps);
        a[r] = v.first;
        b[r] = v.second;
    });
    FreeEnergyReport rep;
    rep.horizon = H;
    rep.log_at_N = summarize(a, seed);
    rep.log_at_2N = summarize(b, seed);
    for (auto& v : a) v /= H;
    for (auto& v : b) v /= 2.0 * H;
    rep.at_N = summarize(a, seed);
    rep.at_2N = summarize(b, seed);
    const double sig = std::hypot(rep.log_at_2N.stderr_, 2.0 * rep.log_at_N.stderr_);
    rep.superadditive_ok = rep.log_at_2N.mean >= 2.0 * rep.log_at_N.mean - 3.0 * sig;
    return rep;
}

CollisionReport collision_mc(Mode mode, int d, double rho, double horizon, std::size_t replicas, std::uint64_t seed) {
    if (d < 1 || d > 6) throw InvalidArgument("collision_mc: d must be in [1, 6]");
    if (!(horizon >= 0.0) || !(rho >= 0.0)) throw InvalidArgument("collision_mc: need horizon >= 0, rho >= 0");
    if (replicas < 2) throw InvalidArgument("collision_mc: need at least 2 replicas");
    CollisionReport rep;
    rep.samples.resize(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        Rng rng(seed, Stream::quenched, r);
        std::vector<int> x(d, 0), y(d, 0);
        double L = 0.0;
        if (mode == Mode::discrete) {
            const long N = static_cast<long>(horizon);
            for (long n = 1; n <= N; ++n) {
                auto sx = rng.below(2 * d), sy = rng.below(2 * d);
                x[sx >> 1] += (sx & 1) ? -1 : 1;
                y[sy >> 1] += (sy & 1) ? -1 : 1;
                if (x == y) L += 1.0;
            }
        } else {
            // merged Poisson clocks of X (rate 1) and Y (rate rho)
            const double total = 1.0 + rho;
            double now = 0.0;
            for (;;) {
                const double next = now + rng.exponential(total);
                const bool together = x == y;
                if (next >= horizon) {
                    if (together) L += horizon - now;
                    break;
                }
                if (together) L += next - now;
                now = next;
                auto st = rng.below(2 * d);
                auto& w = rng.uniform() * total < 1.0 ? x : y;
                w[st >> 1] += (st & 1) ? -1 : 1;
            }
        }
        rep.samples[r] = L;
    });
    rep.mean = summarize(rep.samples, seed);
    if (horizon > 1.0) rep.log_ratio = rep.mean.mean / std::log(horizon);
    rep.log_ratio_reference = 1.0 / (std::numbers::pi * (1.0 + rho));
    return rep;
}

} // namespace pinlab::quenched
