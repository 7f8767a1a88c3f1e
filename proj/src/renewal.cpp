#include "pinlab/renewal.hpp"
#include "pinlab/disorder.hpp"
#include "pinlab/fourier.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace pinlab::renewal {

namespace {

std::vector<double> cumulative_masses(const RenewalLaw& law) {
    std::vector<double> cum(law.K.size(), 0.0);
    for (std::size_t n = 1; n < law.K.size(); ++n) cum[n] = cum[n - 1] + law.K[n];
    return cum;
}

// Gap drawn by inversion; returns -1 when the gap exceeds `limit`.
long draw_gap(const RenewalLaw& law, const std::vector<double>& cum, double u, long limit) {
    const long nm = law.n_max();
    const long top = std::min(limit, nm);
    if (u < cum[top]) {
        return static_cast<long>(std::upper_bound(cum.begin() + 1, cum.begin() + top + 1, u) - cum.begin());
    }
    if (limit <= nm || law.tail.c.empty()) return -1;
    // inside the fitted tail: find the smallest n with Σ_{m<=n} K >= u
    const double beyond = law.tail.sum_beyond(nm);
    const double r = u - cum[nm];
    if (r >= beyond) return -1; // defect
    auto reached = [&](long n) { return beyond - law.tail.sum_beyond(n) > r; };
    if (!reached(limit)) return -1;
    long lo = nm, hi = limit;
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (reached(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace

RenewalPath sample_renewal(const RenewalLaw& law, long horizon, std::uint64_t seed, std::uint64_t replica) {
    if (horizon < 0) throw InvalidArgument("sample_renewal: horizon must be >= 0");
    if (law.n_max() < 1) throw InvalidArgument("sample_renewal: empty law");
    RenewalPath p;
    p.horizon = horizon;
    p.points.push_back(0);
    Rng rng(seed, Stream::renewal, replica);
    const auto cum = cumulative_masses(law);
    long pos = 0;
    for (;;) {
        const long gap = draw_gap(law, cum, rng.uniform(), horizon - pos);
        if (gap < 0) break;
        pos += gap;
        p.points.push_back(pos);
    }
    return p;
}

double exact_gf_dp(const RenewalLaw& law, long N, double s) {
    if (N < 0) throw InvalidArgument("exact_gf_dp: N must be >= 0");
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("exact_gf_dp: s must lie in [0, 1]");
    std::vector<double> K(N + 1, 0.0), tail(N + 1, 0.0);
    for (long n = 1; n <= N; ++n) K[n] = law.at(n);
    tail[N] = law.tail_mass(N);
    for (long n = N - 1; n >= 0; --n) tail[n] = tail[n + 1] + K[n + 1];
    std::vector<double> g(N + 1, 0.0), terms;
    for (long j = N; j >= 0; --j) {
        terms.clear();
        for (long n = 1; n <= N - j; ++n) terms.push_back(K[n] * g[j + n]);
        g[j] = s * pairwise_sum(terms) + tail[N - j];
    }
    return g[0];
}

McEstimate gf_mc(const RenewalLaw& law, long N, double s, int replicas, std::uint64_t seed) {
    if (replicas < 2) throw InvalidArgument("gf_mc: replicas must be >= 2");
    std::vector<double> v(replicas);
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        auto p = sample_renewal(law, N, seed, r);
        v[r] = std::pow(s, static_cast<double>(p.count()));
    });
    return summarize(v, seed);
}

AppendixATable appendixA_scan(const AppendixAParams& prm, const RenewalLaw& law) {
    if (!(prm.c > 0.0)) throw InvalidArgument("appendixA_scan: c must be > 0");
    if (!(prm.delta1 >= 0.0 && prm.delta1 < prm.delta2 && prm.delta2 < 1.0))
        throw InvalidArgument("appendixA_scan: need 0 <= delta1 < delta2 < 1");
    AppendixATable t;
    for (long N : prm.N_grid) {
        if (N < 1) throw InvalidArgument("appendixA_scan: N_grid entries must be >= 1");
        AppendixARow r;
        r.N = N;
        r.s = std::exp(-prm.c * std::pow(static_cast<double>(N), -prm.delta1));
        r.value = exact_gf_dp(law, N, r.s);
        r.prefactored_value = std::pow(static_cast<double>(N), 1.0 - prm.delta2) * r.value;
        if (prm.mc_replicas > 0) {
            auto mc = gf_mc(law, N, r.s, prm.mc_replicas, prm.seed + static_cast<std::uint64_t>(N));
            r.mc_value = std::pow(static_cast<double>(N), 1.0 - prm.delta2) * mc.mean;
            r.mc_stderr = std::pow(static_cast<double>(N), 1.0 - prm.delta2) * mc.stderr_;
        }
        if (!t.rows.empty()) {
            const auto& prev = t.rows.back();
            if (N <= prev.N) throw InvalidArgument("appendixA_scan: N_grid must be increasing");
            r.ratio = r.prefactored_value / prev.prefactored_value;
            r.decade_ratio = std::pow(r.ratio, 1.0 / std::log10(static_cast<double>(N) / prev.N));
        }
        t.rows.push_back(r);
    }
    t.strictly_decreasing = t.rows.size() >= 2;
    t.decay_flag = t.rows.size() >= 2;
    t.max_ratio = 0.0;
    t.max_decade_ratio = 0.0;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        t.max_ratio = std::max(t.max_ratio, t.rows[i].ratio);
        t.max_decade_ratio = std::max(t.max_decade_ratio, t.rows[i].decade_ratio);
        if (!(t.rows[i].ratio < 1.0)) t.strictly_decreasing = false;
        if (!(t.rows[i].decade_ratio <= 0.5)) t.decay_flag = false;
    }
    return t;
}

void parity_expectations_direct(int d, double h, int n_max, std::vector<double>& E_even,
                                std::vector<double>& E_odd) {
    using Pt = std::array<int, 6>;
    using Dist = std::map<Pt, double>;
    auto table = kernels::kernel_table(d, n_max);
    const auto Q = disorder::two_step_law(d, h);
    Dist uni;
    for (int a = 0; a < d; ++a)
        for (int sgn : {1, -1}) {
            Pt p{};
            p[a] = sgn;
            uni[p] += 1.0 / (2 * d);
        }
    Dist cond; // second step of a pair, given the first was +e_1
    for (int a = 0; a < d; ++a)
        for (int sgn : {1, -1}) {
            Pt p{};
            p[a] = sgn;
            double w = 1.0 / (2 * d);
            if (a == 0) w = (sgn > 0 ? 1.0 + h : 1.0 - h) / (2 * d);
            cond[p] += w;
        }
    auto conv = [](const Dist& A, const Dist& B) {
        Dist C;
        for (auto& [x, px] : A)
            for (auto& [y, py] : B) {
                Pt z;
                for (int i = 0; i < 6; ++i) z[i] = x[i] + y[i];
                C[z] += px * py;
            }
        return C;
    };
    auto expect = [&](const Dist& D, int n) {
        std::vector<double> terms;
        for (auto& [y, py] : D) terms.push_back(py * table->p(n, std::span<const int>(y.data(), d)));
        return pairwise_sum(terms);
    };
    E_even.assign(n_max + 1, 0.0);
    E_odd.assign(n_max + 1, 0.0);
    Dist pairs{{Pt{}, 1.0}};
    for (int n = 1; n <= n_max; ++n) {
        if (n % 2 == 0) pairs = conv(pairs, Q);
        E_even[n] = expect(n % 2 ? conv(pairs, uni) : pairs, n);
    }
    Dist after = cond;
    Dist podd{{Pt{}, 1.0}};
    for (int n = 1; n <= n_max; ++n) {
        // steps after the conditioned one: ⌊(n-1)/2⌋ pairs then a free step if n-1 is odd
        if (n >= 3 && (n - 1) % 2 == 0) podd = conv(podd, Q);
        Dist D = conv(after, podd);
        if ((n - 1) % 2 == 1) D = conv(D, uni);
        E_odd[n] = expect(D, n);
    }
}

namespace {

RenewalLaw law_from_expectations(const std::vector<double>& E, double G, int d, const char* name) {
    std::vector<double> K(E.size(), 0.0);
    double head = 0.0;
    for (std::size_t n = 1; n < E.size(); ++n) {
        K[n] = E[n] / G;
        head += K[n];
    }
    const double rem = 1.0 - head;
    const long nm = static_cast<long>(E.size()) - 1;
    if (rem < -1e-10) {
        std::ostringstream os;
        os << "parity_law: " << name << " masses exceed the Green normalization by " << -rem;
        throw NumericalError(os.str());
    }
    kernels::PowerTail tail;
    tail.s = d / 2.0;
    tail.c = {std::max(rem, 0.0) / special::hurwitz_zeta(tail.s, nm + 1.0)};
    auto law = annealed::renewal_law_from_masses(std::move(K), tail, d / 2.0 - 1.0, name);
    law.d = d;
    law.normalizer = G;
    return law;
}

} // namespace

namespace {

// Joint moments E[φ^{2e} T^j] of φ = mean of cos k_i and T = mean of sin² k_i
// over d independent uniform angles, for e + j <= L. Row e holds j = 0..L-e.
// Blocks of k1 and k2 coordinates combine by
//   φ = a φ₁ + (1-a) φ₂,  T = a T₁ + (1-a) T₂,  a = k1 / (k1 + k2),
// and odd powers of φ average to zero, so every term is nonnegative.
using MomentTable = std::vector<std::vector<double>>;

MomentTable single_axis_moments(int L) {
    MomentTable M(L + 1);
    const double lpi = std::log(std::numbers::pi);
    for (int e = 0; e <= L; ++e) {
        M[e].resize(L - e + 1);
        for (int j = 0; j <= L - e; ++j)
            M[e][j] = std::exp(std::lgamma(e + 0.5) + std::lgamma(j + 0.5) - lpi - std::lgamma(e + j + 1.0));
    }
    return M;
}

std::vector<std::vector<double>> binomial_weights(int n, double a, int stride) {
    // w[r][s] = C(stride·r, stride·s) a^{stride·s} (1-a)^{stride·(r-s)}
    std::vector<std::vector<double>> w(n + 1);
    const double la = std::log(a), lb = std::log1p(-a);
    for (int r = 0; r <= n; ++r) {
        w[r].resize(r + 1);
        const int R = stride * r;
        for (int q = 0; q <= r; ++q) {
            const int S = stride * q;
            w[r][q] = std::exp(std::lgamma(R + 1.0) - std::lgamma(S + 1.0) - std::lgamma(R - S + 1.0) + S * la +
                               (R - S) * lb);
        }
    }
    return w;
}

MomentTable combine_moments(const MomentTable& A, int ka, const MomentTable& B, int kb, int L) {
    const double a = static_cast<double>(ka) / (ka + kb);
    const auto we = binomial_weights(L, a, 2);
    const auto wj = binomial_weights(L, a, 1);
    MomentTable C(L + 1);
    parallel_for(static_cast<std::size_t>(L + 1), [&](std::size_t eu) {
        const int e = static_cast<int>(eu);
        const int J = L - e;
        C[e].assign(J + 1, 0.0);
        std::vector<double> inner(J + 1);
        for (int e1 = 0; e1 <= e; ++e1) {
            const auto& ra = A[e1];
            const auto& rb = B[e - e1];
            for (int j = 0; j <= J; ++j) {
                double acc = 0.0;
                const double* wr = wj[j].data();
                for (int j1 = 0; j1 <= j; ++j1) acc += wr[j1] * ra[j1] * rb[j - j1];
                inner[j] = acc;
            }
            const double w = we[e][e1];
            for (int j = 0; j <= J; ++j) C[e][j] += w * inner[j];
        }
    });
    return C;
}

MomentTable pair_moments(int d, int L) {
    const auto one = single_axis_moments(L);
    MomentTable acc;
    int kacc = 0;
    MomentTable pw = one;
    int kpw = 1;
    for (int bits = d;;) {
        if (bits & 1) {
            if (kacc == 0) {
                acc = pw;
            } else {
                acc = combine_moments(acc, kacc, pw, kpw, L);
            }
            kacc += kpw;
        }
        bits >>= 1;
        if (!bits) break;
        pw = combine_moments(pw, kpw, pw, kpw, L);
        kpw *= 2;
    }
    return acc;
}

} // namespace

std::pair<std::vector<double>, std::vector<double>> parity_expectations_moments(int d, double h, int n_max) {
    if (d < 1 || d > kernels::kMaxDim) throw InvalidArgument("parity_expectations_moments: d must be in [1, 6]");
    if (n_max < 1) throw InvalidArgument("parity_expectations_moments: n_max must be >= 1");
    // Averages of φ^A ψ^B with ψ = φ² - (h/d) T; 2A + ... all have A + 2B = 2n.
    const int L = n_max + 1;
    const auto M = pair_moments(d, L);
    const double lr = h > 0.0 ? std::log(h / d) : 0.0;
    auto average = [&](int A, int B) {
        // Σ_j C(B, j) (-h/d)^j E[φ^{A+2B-2j} T^j]
        const int top = h > 0.0 ? B : 0;
        std::vector<double> terms;
        terms.reserve(top + 1);
        for (int j = 0; j <= top; ++j) {
            const int e = (A + 2 * B - 2 * j) / 2;
            const double c =
                j == 0 ? 1.0 : std::exp(std::lgamma(B + 1.0) - std::lgamma(j + 1.0) - std::lgamma(B - j + 1.0) + j * lr);
            terms.push_back((j % 2 ? -c : c) * M[e][j]);
        }
        return pairwise_sum(terms);
    };
    std::vector<double> E_even(n_max + 1, 0.0), E_odd(n_max + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        E_even[n] = average(n + (n % 2), n / 2);
        E_odd[n] = average(n + 1 + ((n - 1) % 2), (n - 1) / 2);
    }
    return {std::move(E_even), std::move(E_odd)};
}

ParityLaw parity_law(int d, double h, int n_max) {
    if (d < 3 || d > kernels::kMaxDim) throw InvalidArgument("parity_law: d must be in [3, 6]");
    if (!(h >= 0.0 && h < 1.0)) throw InvalidArgument("parity_law: need 0 <= h < 1");
    if (n_max < 1) throw InvalidArgument("parity_law: n_max must be >= 1");
    ParityLaw pl;
    pl.d = d;
    pl.h = h;
    auto ev = parity_expectations_moments(d, h, n_max);
    pl.E_even = std::move(ev.first);
    pl.E_odd = std::move(ev.second);
    // position-space cross-check at small n
    pl.cross_check_n = std::min(n_max, d <= 4 ? 8 : 4);
    std::vector<double> de, dodd;
    parity_expectations_direct(d, h, pl.cross_check_n, de, dodd);
    for (int n = 1; n <= pl.cross_check_n; ++n) {
        pl.cross_check_error = std::max(pl.cross_check_error, std::fabs(de[n] - pl.E_even[n]) / de[n]);
        pl.cross_check_error = std::max(pl.cross_check_error, std::fabs(dodd[n] - pl.E_odd[n]) / dodd[n]);
    }
    if (pl.cross_check_error > 1e-10) {
        std::ostringstream os;
        os << "parity_law: Fourier and position-space expectations differ by " << pl.cross_check_error
           << " (relative), tolerance 1e-10";
        throw ToleranceNotMet(os.str(), pl.cross_check_error);
    }
    auto tg = kernels::tilted_greens(d, h);
    pl.G_even = tg.g_even;
    pl.G_odd = tg.g_odd;
    pl.G_pair = tg.g_pair;
    pl.K_even = law_from_expectations(pl.E_even, pl.G_even, d, "parity_even");
    pl.K_odd = law_from_expectations(pl.E_odd, pl.G_odd, d, "parity_odd");
    return pl;
}

std::vector<double> tail_function(const RenewalLaw& law, long n_max) {
    std::vector<double> T(n_max + 2, 0.0);
    T[n_max + 1] = law.tail_mass(n_max);
    for (long n = n_max; n >= 1; --n) T[n] = T[n + 1] + law.at(n);
    T[0] = T[1];
    return T;
}

DominatingLaw dominating_law(const std::vector<RenewalLaw>& laws, long n_max) {
    if (laws.empty()) throw InvalidArgument("dominating_law: no input laws");
    if (n_max < 1) throw InvalidArgument("dominating_law: n_max must be >= 1");
    std::vector<std::vector<double>> T;
    for (auto& l : laws) T.push_back(tail_function(l, n_max));
    std::vector<double> Ts(n_max + 2, 0.0);
    int arg_last = 0;
    for (long n = 1; n <= n_max + 1; ++n)
        for (std::size_t i = 0; i < laws.size(); ++i)
            if (T[i][n] > Ts[n]) {
                Ts[n] = T[i][n];
                if (n == n_max + 1) arg_last = static_cast<int>(i);
            }
    DominatingLaw out;
    out.raw_mass = Ts[1];
    if (!(out.raw_mass > 0.0) || !std::isfinite(out.raw_mass))
        throw NumericalError("dominating_law: construction produced a non-normalizable law");
    for (auto& v : Ts) v /= out.raw_mass;
    std::vector<double> K(n_max + 1, 0.0);
    for (long n = 1; n <= n_max; ++n) K[n] = std::max(0.0, Ts[n] - Ts[n + 1]);
    kernels::PowerTail tail = laws[arg_last].tail;
    const double src = T[arg_last][n_max + 1];
    if (Ts[n_max + 1] > 0.0) {
        if (tail.c.empty() || !(src > 0.0))
            throw NumericalError("dominating_law: tail mass without a tail shape to carry it");
        const double scale = Ts[n_max + 1] / tail.sum_beyond(n_max);
        for (auto& c : tail.c) c *= scale;
    } else {
        tail.c.clear();
    }
    out.law = annealed::renewal_law_from_masses(std::move(K), tail, laws[arg_last].tail_index, "dominating");
    out.law.d = laws[arg_last].d;
    // certificate, recomputed from the constructed law
    auto Tn = tail_function(out.law, n_max);
    out.certificate.min_margin = INFINITY;
    for (std::size_t i = 0; i < laws.size(); ++i)
        for (long n = 1; n <= n_max + 1; ++n) {
            const double m = Tn[n] - T[i][n];
            if (m < out.certificate.min_margin) {
                out.certificate.min_margin = m;
                out.certificate.worst_n = n;
                out.certificate.worst_law = static_cast<int>(i);
            }
        }
    out.certificate.holds = out.certificate.min_margin >= -1e-12;
    return out;
}

} // namespace pinlab::renewal
