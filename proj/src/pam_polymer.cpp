#include "pinlab/pam_polymer.hpp"

#include "box_evolver.hpp"
#include "pinlab/kernels.hpp"
#include "pinlab/quenched.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pinlab::pam {

long Field::index(const int* x) const {
    long s = 0, stride = 1;
    const int side = 2 * radius + 1;
    for (int i = 0; i < d; ++i) {
        if (x[i] < -radius || x[i] > radius) return -1;
        s += static_cast<long>(x[i] + radius) * stride;
        stride *= side;
    }
    return s;
}

double Field::at(const int* x) const { return std::exp(log_at(x)); }

double Field::log_at(const int* x) const {
    const long s = index(x);
    if (s < 0) return 0.0; // frozen exterior
    return std::log(values[s]) + log_scale;
}

Field pam_solve(int d, double beta, double rho, double t, const DisorderPath& path, double eps) {
    if (d < 1 || d > kernels::kMaxDim) throw InvalidArgument("pam_solve: d must be in [1, 6]");
    if (path.mode != Mode::continuous || path.d != d)
        throw InvalidArgument("pam_solve: needs a continuous-time path of matching dimension");
    if (!(t >= 0.0) || t > path.horizon + 1e-12) throw InvalidArgument("pam_solve: t outside the path horizon");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("pam_solve: eps must be in (0, 1)");
    if (!(rho >= 0.0)) throw InvalidArgument("pam_solve: rho must be >= 0");

    const auto pos = path.positions();
    int ymax = 0;
    for (int v : pos) ymax = std::max(ymax, std::abs(v));

    Field f;
    f.d = d;
    f.time = t;
    f.valid_radius = ymax;

    if (beta == 0.0) {
        // no potential: the constant initial condition is stationary
        f.radius = ymax;
        long n = 1;
        for (int i = 0; i < d; ++i) n *= 2 * ymax + 1;
        f.values.assign(n, 1.0);
        return f;
    }

    const double bp = std::max(0.0, beta);
    // u(t, 0) >= e^{min(0, β) t}; errors are budgeted relative to that floor
    const double log_floor = std::min(0.0, beta) * t;
    const double log_target = std::log(eps) + log_floor - std::log(2.0);
    const double log_box = log_target - bp * t;
    long reach = t > 0.0 ? special::poisson_upper(t, std::exp(std::max(log_box, -700.0))) : 0;
    if (log_box < -700.0)
        while (special::log_poisson_sf(t, reach) > log_box) reach += std::max<long>(1, reach / 8);
    const long R = reach + ymax;
    long cells = 1;
    for (int i = 0; i < d; ++i) {
        cells *= 2 * R + 1;
        if (cells > 50'000'000) throw BudgetExceeded("pam_solve: box exceeds 5e7 sites");
    }
    f.radius = static_cast<int>(R);

    detail::BoxEvolver box(d, static_cast<int>(R), true);
    const double lam = 1.0 + std::max(0.0, -beta) + bp;
    const double n_sub = std::ceil(lam * t / 4.0) + static_cast<double>(path.times.size()) + 1.0;
    const double log_tail = log_target - bp * t - std::log(n_sub);

    std::vector<double> v(box.state_size(), 1.0);
    double log_scale = 0.0, log_err = -INFINITY;
    double now = 0.0;
    std::size_t jump = 0;
    while (now < t) {
        double next = t;
        if (jump < path.times.size() && path.times[jump] < next) next = path.times[jump];
        const long site = box.index(&pos[jump * d]);
        box.evolve(v, log_scale, next - now, site, beta, log_tail, true, log_err, t - next);
        now = next;
        if (jump < path.times.size() && path.times[jump] <= now) ++jump;
    }
    v.resize(box.size());
    f.values = std::move(v);
    f.log_scale = log_scale;
    const double box_err = bp * t + special::log_poisson_sf(t, R - ymax);
    f.truncation_bound = std::exp(log_add(log_err, box_err));

    std::vector<int> zero(d, 0);
    const double u0 = f.at(zero.data());
    if (!(f.truncation_bound <= eps * u0)) {
        std::ostringstream os;
        os << "pam_solve: truncation bound " << f.truncation_bound / u0 << " exceeds relative eps=" << eps;
        throw ToleranceNotMet(os.str(), f.truncation_bound / u0);
    }
    return f;
}

DisorderPath reverse_path(const DisorderPath& path, double t) {
    if (path.mode != Mode::continuous) throw InvalidArgument("reverse_path: continuous path required");
    if (!(t >= 0.0) || t > path.horizon + 1e-12) throw InvalidArgument("reverse_path: t outside the path horizon");
    DisorderPath r;
    r.mode = Mode::continuous;
    r.d = path.d;
    r.horizon = t;
    r.rate = path.rate;
    const std::size_t n =
        static_cast<std::size_t>(std::upper_bound(path.times.begin(), path.times.end(), t) - path.times.begin());
    for (std::size_t k = n; k-- > 0;) {
        const double s = t - path.times[k];
        if (s <= 0.0) continue;
        r.times.push_back(s);
        r.steps.push_back(disorder::reverse_step(path.steps[k]));
    }
    return r;
}

std::vector<double> lyapunov_samples(int d, double beta, double rho, double t, std::size_t replicas,
                                     std::uint64_t seed, double eps) {
    if (!(t > 0.0)) throw InvalidArgument("lyapunov_samples: t must be > 0");
    std::vector<double> out(replicas);
    std::vector<int> zero(d, 0);
    parallel_for(replicas, [&](std::size_t r) {
        auto path = disorder::sample_ct(d, rho, t, seed, r);
        out[r] = pam_solve(d, beta, rho, t, path, eps).log_at(zero.data()) / t;
    });
    return out;
}

McEstimate lyapunov_estimate(int d, double beta, double rho, double t, std::size_t replicas, std::uint64_t seed,
                             double eps) {
    if (replicas < 2) throw InvalidArgument("lyapunov_estimate: need at least 2 replicas");
    auto s = lyapunov_samples(d, beta, rho, t, replicas, seed, eps);
    return summarize(s, seed);
}

double drift_band(int d, double t) { return (1.0 + 0.5 * d * std::log1p(t)) / t; }

LyapunovComparison compare_lyapunov(int d, double beta, double rho, double t, std::size_t replicas,
                                    std::uint64_t seed, double eps) {
    if (replicas < 2) throw InvalidArgument("compare_lyapunov: need at least 2 replicas");
    quenched::ModelParams p;
    p.mode = Mode::continuous;
    p.d = d;
    p.beta = beta;
    p.rho = rho;
    auto a = lyapunov_samples(d, beta, rho, t, replicas, seed, eps);
    auto b = quenched::free_energy_samples(p, t, replicas, seed, eps);
    std::vector<double> diff(replicas);
    for (std::size_t i = 0; i < replicas; ++i) diff[i] = a[i] - b[i];
    LyapunovComparison c;
    c.t = t;
    c.lambda0 = summarize(a, seed);
    c.free_energy = summarize(b, seed);
    c.paired_difference = summarize(diff, seed);
    c.combined_sigma = std::hypot(c.lambda0.stderr_, c.free_energy.stderr_);
    c.drift_band = drift_band(d, t);
    c.agree = std::fabs(c.lambda0.mean - c.free_energy.mean) <= 3.0 * c.combined_sigma + c.drift_band;
    return c;
}

} // namespace pinlab::pam

// ===========================================================================

namespace pinlab::polymer {

namespace {

// Neumaier compensated sum.
struct Accumulator {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double t = s + x;
        c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

void check_dim(int d, const char* who) {
    if (d < 1 || d > kernels::kMaxDim) throw InvalidArgument(std::string(who) + ": d must be in [1, 6]");
}

// Every walk of N steps from 0, as indices into a list of sites.
struct PathSites {
    int d = 1;
    long N = 0;
    std::vector<std::pair<long, std::vector<int>>> sites;
    std::vector<std::uint32_t> idx; // paths * N
    std::size_t paths = 0;

    PathSites(int d_, long N_) : d(d_), N(N_) {
        sites = reachable_sites(d, N);
        double count = std::pow(2.0 * d, static_cast<double>(N));
        if (count > 1e7) throw InstanceTooLarge("polymer: (2d)^N exceeds 1e7 walks");
        paths = static_cast<std::size_t>(count);
        auto find = [&](long i, const std::vector<int>& x) {
            auto it = std::lower_bound(sites.begin(), sites.end(), std::make_pair(i, x));
            return static_cast<std::uint32_t>(it - sites.begin());
        };
        idx.resize(paths * N);
        std::vector<int> x(d);
        for (std::size_t p = 0; p < paths; ++p) {
            std::fill(x.begin(), x.end(), 0);
            std::size_t code = p;
            for (long i = 1; i <= N; ++i) {
                const int s = static_cast<int>(code % (2 * d));
                code /= 2 * d;
                x[s / 2] += (s % 2) ? -1 : 1;
                idx[p * N + (i - 1)] = find(i, x);
            }
        }
    }
};

// Enumerates assignments of a finite law to `n` slots; calls fn(choice, prob).
template <class Fn>
void for_each_assignment(std::size_t n, const DisorderLaw& law, Fn&& fn) {
    const std::size_t k = law.values.size();
    std::vector<std::size_t> c(n, 0);
    while (true) {
        double pr = 1.0;
        for (std::size_t j = 0; j < n; ++j) pr *= law.probs[c[j]];
        fn(c, pr);
        std::size_t j = 0;
        while (j < n && ++c[j] == k) c[j++] = 0;
        if (j == n) break;
    }
}

double count_configurations(std::size_t slots, std::size_t support) {
    return std::pow(static_cast<double>(support), static_cast<double>(slots));
}

} // namespace

DisorderLaw DisorderLaw::bernoulli_pm1() { return DisorderLaw{{-1.0, 1.0}, {0.5, 0.5}}; }

void DisorderLaw::validate() const {
    if (values.empty() || values.size() != probs.size())
        throw InvalidArgument("disorder law: values and probs must be non-empty and of equal length");
    double s = 0.0, m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(probs[i] > 0.0)) throw InvalidArgument("disorder law: probabilities must be > 0");
        s += probs[i];
        m += probs[i] * values[i];
    }
    if (std::fabs(s - 1.0) > 1e-12) throw InvalidArgument("disorder law: probabilities must sum to 1");
    if (std::fabs(m) > 1e-12) throw InvalidArgument("disorder law: mean must be 0");
}

double DisorderLaw::log_mgf(double lambda) const {
    double mx = -INFINITY;
    for (double v : values) mx = std::max(mx, lambda * v);
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += probs[i] * std::exp(lambda * values[i] - mx);
    return mx + std::log(s);
}

DisorderLaw DisorderLaw::tilted(double lambda) const {
    const double M = log_mgf(lambda);
    DisorderLaw t = *this;
    for (std::size_t i = 0; i < values.size(); ++i) t.probs[i] = probs[i] * std::exp(lambda * values[i] - M);
    return t;
}

double PolymerSpec::beta_hat() const { return polymer::beta_hat(lambda, law); }

double beta_hat(double lambda, const DisorderLaw& law) { return law.log_mgf(2.0 * lambda) - 2.0 * law.log_mgf(lambda); }

double beta_hat(double lambda, const std::function<double(double)>& log_mgf) {
    const double m2 = log_mgf(2.0 * lambda);
    if (!std::isfinite(m2)) throw InvalidArgument("beta_hat: M(2λ) is not finite");
    return m2 - 2.0 * log_mgf(lambda);
}

double lambda2(int d, const DisorderLaw& law) {
    check_dim(d, "lambda2");
    law.validate();
    if (d <= 2) return 0.0;
    const double target = std::log1p(1.0 / kernels::green_pair_value(d));
    double lo = 0.0, hi = 1.0;
    // for bounded laws β̂ may saturate below the target; E[Z²] is then bounded
    // for every λ
    while (beta_hat(hi, law) < target) {
        hi *= 2.0;
        if (hi > 1e3) return INFINITY;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (beta_hat(mid, law) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

OmegaField::OmegaField(int d_, long N_, double fill) : d(d_), N(N_) {
    check_dim(d, "OmegaField");
    if (N < 0) throw InvalidArgument("OmegaField: N must be >= 0");
    const double total = static_cast<double>(N) * std::pow(2.0 * N + 1.0, d);
    if (total > 5e7) throw BudgetExceeded("OmegaField: more than 5e7 sites");
    values.assign(static_cast<std::size_t>(total), fill);
}

std::size_t OmegaField::sites_per_layer() const {
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= 2 * N + 1;
    return n;
}

std::size_t OmegaField::offset(long i, const int* x) const {
    std::size_t s = 0, stride = 1;
    for (int k = 0; k < d; ++k) {
        s += static_cast<std::size_t>(x[k] + N) * stride;
        stride *= 2 * N + 1;
    }
    return static_cast<std::size_t>(i - 1) * sites_per_layer() + s;
}

OmegaField OmegaField::sample(int d, long N, const DisorderLaw& law, std::uint64_t seed, std::uint64_t replica) {
    law.validate();
    OmegaField f(d, N);
    Rng rng(seed, Stream::polymer, replica);
    std::vector<double> cdf(law.probs.size());
    std::partial_sum(law.probs.begin(), law.probs.end(), cdf.begin());
    for (auto& v : f.values) {
        const double u = rng.uniform() * cdf.back();
        std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        v = law.values[std::min(k, law.values.size() - 1)];
    }
    return f;
}

std::vector<std::pair<long, std::vector<int>>> reachable_sites(int d, long N) {
    check_dim(d, "reachable_sites");
    std::vector<std::pair<long, std::vector<int>>> out;
    std::vector<int> x(d);
    for (long i = 1; i <= N; ++i) {
        const long side = 2 * i + 1;
        long total = 1;
        for (int k = 0; k < d; ++k) total *= side;
        for (long c = 0; c < total; ++c) {
            long r = c, l1 = 0;
            for (int k = 0; k < d; ++k) {
                x[k] = static_cast<int>(r % side) - static_cast<int>(i);
                r /= side;
                l1 += std::abs(x[k]);
            }
            if (l1 <= i && (l1 - i) % 2 == 0) out.emplace_back(i, x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double polymer_partition_enumerate(double lambda, long N, int d, const OmegaField& omega, const DisorderLaw& law) {
    check_dim(d, "polymer_partition");
    if (omega.d != d || omega.N < N) throw InvalidArgument("polymer_partition: omega field does not cover N");
    const double count = std::pow(2.0 * d, static_cast<double>(N));
    if (count > 1e7) throw InstanceTooLarge("polymer_partition: (2d)^N exceeds 1e7 for the exact route");
    const double M = law.log_mgf(lambda);
    const std::size_t paths = static_cast<std::size_t>(count);
    Accumulator acc;
    std::vector<int> x(d);
    for (std::size_t p = 0; p < paths; ++p) {
        std::fill(x.begin(), x.end(), 0);
        std::size_t code = p;
        double e = 0.0;
        for (long i = 1; i <= N; ++i) {
            const int s = static_cast<int>(code % (2 * d));
            code /= 2 * d;
            x[s / 2] += (s % 2) ? -1 : 1;
            e += lambda * omega.at(i, x.data()) - M;
        }
        acc.add(std::exp(e));
    }
    return acc.value() / count;
}

double polymer_partition_dp(double lambda, long N, int d, const OmegaField& omega, const DisorderLaw& law) {
    check_dim(d, "polymer_partition");
    if (omega.d != d || omega.N < N) throw InvalidArgument("polymer_partition: omega field does not cover N");
    const double M = law.log_mgf(lambda);
    const long side = 2 * N + 1;
    std::vector<long> stride(d, 1);
    for (int k = 1; k < d; ++k) stride[k] = stride[k - 1] * side;
    const std::size_t n = static_cast<std::size_t>(stride[d - 1] * side);
    std::vector<double> v(n, 0.0), w(n);
    long origin = 0;
    for (int k = 0; k < d; ++k) origin += N * stride[k];
    v[origin] = 1.0;
    std::vector<int> x(d);
    const double q = 1.0 / (2.0 * d);
    for (long i = 1; i <= N; ++i) {
        for (std::size_t s = 0; s < n; ++s) {
            long r = static_cast<long>(s);
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                x[k] = static_cast<int>(r % side) - static_cast<int>(N);
                r /= side;
            }
            for (int k = 0; k < d; ++k) {
                if (x[k] > -N) acc += v[s - stride[k]];
                if (x[k] < N) acc += v[s + stride[k]];
            }
            w[s] = acc == 0.0 ? 0.0 : q * acc * std::exp(lambda * omega.at(i, x.data()) - M);
        }
        v.swap(w);
    }
    return pairwise_sum(v);
}

PolymerValue polymer_partition(double lambda, long N, int d, const OmegaField& omega, const DisorderLaw& law) {
    law.validate();
    if (!(lambda >= 0.0)) throw InvalidArgument("polymer_partition: lambda must be >= 0");
    if (N < 0) throw InvalidArgument("polymer_partition: N must be >= 0");
    if (std::pow(2.0 * d, static_cast<double>(N)) <= 1e7)
        return {polymer_partition_enumerate(lambda, N, d, omega, law), "enumeration"};
    return {polymer_partition_dp(lambda, N, d, omega, law), "field-dp"};
}

ExactMoments exact_moments(double lambda, long N, int d, const DisorderLaw& law) {
    law.validate();
    check_dim(d, "exact_moments");
    if (N < 0) throw InvalidArgument("exact_moments: N must be >= 0");
    PathSites P(d, N + 1);
    // sites of layers 1..N come first in the sorted list
    std::size_t inner = 0;
    while (inner < P.sites.size() && P.sites[inner].first <= N) ++inner;
    const std::size_t outer = P.sites.size() - inner;
    const std::size_t k = law.values.size();
    if (count_configurations(P.sites.size(), k) * static_cast<double>(P.paths) > 2e9)
        throw InstanceTooLarge("exact_moments: enumeration too large");
    const double M = law.log_mgf(lambda);
    ExactMoments em;
    Accumulator m1, m2;
    std::vector<double> om(P.sites.size());
    const std::size_t stride_N = static_cast<std::size_t>(N + 1);
    for_each_assignment(inner, law, [&](const std::vector<std::size_t>& c, double pr) {
        for (std::size_t j = 0; j < inner; ++j) om[j] = law.values[c[j]];
        // Z_N from the first N steps of each (N+1)-step walk, every N-step walk
        // appearing 2d times
        Accumulator zN;
        for (std::size_t p = 0; p < P.paths; ++p) {
            double e = 0.0;
            for (long i = 0; i < N; ++i) e += lambda * om[P.idx[p * stride_N + i]] - M;
            zN.add(std::exp(e));
        }
        const double Z = zN.value() / static_cast<double>(P.paths);
        m1.add(pr * Z);
        m2.add(pr * Z * Z);
        Accumulator cond;
        for_each_assignment(outer, law, [&](const std::vector<std::size_t>& c2, double pr2) {
            for (std::size_t j = 0; j < outer; ++j) om[inner + j] = law.values[c2[j]];
            Accumulator z1;
            for (std::size_t p = 0; p < P.paths; ++p) {
                double e = 0.0;
                for (long i = 0; i <= N; ++i) e += lambda * om[P.idx[p * stride_N + i]] - M;
                z1.add(std::exp(e));
            }
            cond.add(pr2 * z1.value() / static_cast<double>(P.paths));
        });
        em.martingale_gap = std::max(em.martingale_gap, std::fabs(cond.value() - Z));
        ++em.configurations;
    });
    em.mean = m1.value();
    em.second = m2.value();
    return em;
}

SizeBiasResult size_bias_check(double lambda, long N, int d, const std::function<double(double)>& f,
                               const DisorderLaw& law) {
    law.validate();
    check_dim(d, "size_bias_check");
    if (!(lambda >= 0.0)) throw InvalidArgument("size_bias_check: lambda must be >= 0");
    if (N < 1) throw InvalidArgument("size_bias_check: N must be >= 1");
    PathSites P(d, N);
    const std::size_t S = P.sites.size();
    const std::size_t k = law.values.size();
    const double work = count_configurations(2 * S, k) * static_cast<double>(P.paths * P.paths) * N;
    if (work > 5e9) throw InstanceTooLarge("size_bias_check: enumeration too large");
    const double M = law.log_mgf(lambda);
    const DisorderLaw tl = law.tilted(lambda);
    const double np = static_cast<double>(P.paths);

    SizeBiasResult res;
    Accumulator rhs, lhs;
    std::vector<double> om(S), omt(S);
    for_each_assignment(S, law, [&](const std::vector<std::size_t>& c, double pr) {
        for (std::size_t j = 0; j < S; ++j) om[j] = law.values[c[j]];
        Accumulator z;
        for (std::size_t p = 0; p < P.paths; ++p) {
            double e = 0.0;
            for (long i = 0; i < N; ++i) e += lambda * om[P.idx[p * N + i]] - M;
            z.add(std::exp(e));
        }
        const double Z = z.value() / np;
        rhs.add(pr * Z * f(Z));
        for_each_assignment(S, tl, [&](const std::vector<std::size_t>& ct, double prt) {
            for (std::size_t j = 0; j < S; ++j) omt[j] = tl.values[ct[j]];
            for (std::size_t y = 0; y < P.paths; ++y) {
                Accumulator zt;
                for (std::size_t p = 0; p < P.paths; ++p) {
                    double e = 0.0;
                    for (long i = 0; i < N; ++i) {
                        const auto sx = P.idx[p * N + i];
                        const auto sy = P.idx[y * N + i];
                        e += lambda * (sx == sy ? omt[sx] : om[sx]) - M;
                    }
                    zt.add(std::exp(e));
                }
                lhs.add(pr * prt / np * f(zt.value() / np));
                ++res.configurations;
            }
        });
    });
    res.lhs = lhs.value();
    res.rhs = rhs.value();
    res.diff = res.lhs - res.rhs;
    return res;
}

} // namespace pinlab::polymer
