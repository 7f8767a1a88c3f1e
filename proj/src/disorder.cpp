#include "pinlab/disorder.hpp"
#include "pinlab/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace pinlab::disorder {

namespace {

void check_dim(int d, const char* who) {
    if (d < 1 || d > 6) throw InvalidArgument(std::string(who) + ": d must be in [1, 6]");
}

void check_tilt(int d, double h) {
    if (!(h >= 0.0) || !(h < 1.0)) throw InvalidArgument("tilt h must satisfy 0 <= h < 1");
    (void)d;
}

} // namespace

std::vector<int> DisorderPath::positions() const {
    std::vector<int> out((steps.size() + 1) * d, 0);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        std::copy_n(out.begin() + i * d, d, out.begin() + (i + 1) * d);
        out[(i + 1) * d + step_axis(steps[i])] += step_sign(steps[i]);
    }
    return out;
}

std::vector<int> DisorderPath::at_step(std::size_t n) const {
    std::vector<int> y(d, 0);
    const std::size_t m = std::min(n, steps.size());
    for (std::size_t i = 0; i < m; ++i) y[step_axis(steps[i])] += step_sign(steps[i]);
    return y;
}

std::vector<int> DisorderPath::at_time(double t) const {
    if (mode == Mode::discrete) return at_step(static_cast<std::size_t>(std::max(0.0, std::floor(t))));
    const auto n = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    return at_step(n);
}

DisorderPath sample_discrete(int d, long N, std::uint64_t seed, std::uint64_t replica) {
    check_dim(d, "sample_discrete");
    if (N < 0) throw InvalidArgument("sample_discrete: N must be >= 0");
    Rng rng(seed, Stream::disorder, replica);
    DisorderPath p;
    p.mode = Mode::discrete;
    p.d = d;
    p.horizon = static_cast<double>(N);
    p.steps.resize(N);
    for (long i = 0; i < N; ++i) p.steps[i] = static_cast<std::uint8_t>(rng.below(2 * d));
    return p;
}

DisorderPath sample_tilted(int d, long N, double h, std::uint64_t seed, std::uint64_t replica) {
    check_dim(d, "sample_tilted");
    check_tilt(d, h);
    if (N < 0) throw InvalidArgument("sample_tilted: N must be >= 0");
    Rng rng(seed, Stream::disorder, replica);
    DisorderPath p;
    p.mode = Mode::discrete;
    p.d = d;
    p.horizon = static_cast<double>(N);
    p.tilt = h;
    p.steps.resize(N);
    const double inv = 1.0 / (2.0 * d);
    for (long i = 0; i < N; ++i) {
        if (i % 2 == 0) {
            p.steps[i] = static_cast<std::uint8_t>(rng.below(2 * d));
            continue;
        }
        const std::uint8_t prev = p.steps[i - 1];
        const double u = rng.uniform();
        const double p_rep = (1.0 + h) * inv, p_rev = (1.0 - h) * inv;
        if (u < p_rep) {
            p.steps[i] = prev;
        } else if (u < p_rep + p_rev) {
            p.steps[i] = reverse_step(prev);
        } else {
            // uniform over the remaining 2d - 2 directions
            std::uint64_t k = rng.below(2 * d - 2);
            std::uint8_t s = 0;
            for (std::uint8_t c = 0; c < 2 * d; ++c) {
                if ((c >> 1) == (prev >> 1)) continue;
                if (k-- == 0) {
                    s = c;
                    break;
                }
            }
            p.steps[i] = s;
        }
    }
    return p;
}

double rn_density_discrete(const DisorderPath& path, double h) {
    if (path.mode != Mode::discrete) throw InvalidArgument("rn_density_discrete: path must be discrete");
    double f = 1.0;
    for (std::size_t i = 1; i < path.steps.size(); i += 2) {
        if (path.steps[i] == path.steps[i - 1])
            f *= 1.0 + h;
        else if (path.steps[i] == reverse_step(path.steps[i - 1]))
            f *= 1.0 - h;
    }
    return f;
}

std::vector<double> rn_density_prefix(const DisorderPath& path, double h) {
    if (path.mode != Mode::discrete) throw InvalidArgument("rn_density_prefix: path must be discrete");
    std::vector<double> f(path.steps.size() + 1, 1.0);
    for (std::size_t i = 0; i < path.steps.size(); ++i) {
        f[i + 1] = f[i];
        if (i % 2 == 1) {
            if (path.steps[i] == path.steps[i - 1])
                f[i + 1] *= 1.0 + h;
            else if (path.steps[i] == reverse_step(path.steps[i - 1]))
                f[i + 1] *= 1.0 - h;
        }
    }
    return f;
}

DisorderPath sample_ct(int d, double rho, double t, std::uint64_t seed, std::uint64_t replica) {
    check_dim(d, "sample_ct");
    if (!(rho >= 0.0) || !(t >= 0.0)) throw InvalidArgument("sample_ct: need rho >= 0 and t >= 0");
    Rng rng(seed, Stream::disorder, replica);
    DisorderPath p;
    p.mode = Mode::continuous;
    p.d = d;
    p.horizon = t;
    p.rate = rho;
    const auto n = rng.poisson(rho * t);
    p.times.resize(n);
    p.steps.resize(n);
    for (auto& s : p.times) s = t * rng.uniform();
    std::sort(p.times.begin(), p.times.end());
    // guard against coincident draws so that jump times stay strictly increasing
    for (std::size_t i = 1; i < n; ++i)
        if (p.times[i] <= p.times[i - 1]) p.times[i] = std::nextafter(p.times[i - 1], INFINITY);
    for (auto& s : p.steps) s = static_cast<std::uint8_t>(rng.below(2 * d));
    return p;
}

double rn_density_ct(const DisorderPath& path, double rho, double h, double t) {
    if (!(rho > 0.0)) throw InvalidArgument("rn_density_ct: rho must be > 0");
    if (!(h >= 0.0)) throw InvalidArgument("rn_density_ct: h must be >= 0");
    const auto n = static_cast<double>(std::upper_bound(path.times.begin(), path.times.end(), t) - path.times.begin());
    return std::exp(-h * t + n * std::log1p(h / rho));
}

double density_moment_discrete(int d, double h, double gamma, long N) {
    check_dim(d, "density_moment_discrete");
    check_tilt(d, h);
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must be in (0, 1)");
    const double q = gamma / (1.0 - gamma);
    const double base = 1.0 - 1.0 / d + (std::pow(1.0 + h, -q) + std::pow(1.0 - h, -q)) / (2.0 * d);
    return std::pow(base, static_cast<double>(N / 2));
}

double density_moment_discrete_bound(int d, double h, double gamma, long N) {
    return std::exp(gamma * h * h * N / (2.0 * d * (1.0 - gamma) * (1.0 - gamma)));
}

double density_moment_ct(double rho, double h, double gamma, double t) {
    if (!(rho > 0.0)) throw InvalidArgument("density_moment_ct: rho must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must be in (0, 1)");
    const double q = gamma / (1.0 - gamma);
    return std::exp((rho * std::pow(1.0 + h / rho, -q) - rho + q * h) * t);
}

double density_moment_ct_bound(double rho, double h, double gamma, double t) {
    return std::exp(gamma * h * h * t / (2.0 * rho * (1.0 - gamma) * (1.0 - gamma)));
}

std::map<std::array<int, 6>, double> two_step_law(int d, double h) {
    check_dim(d, "two_step_law");
    std::map<std::array<int, 6>, double> law;
    const double inv = 1.0 / (2.0 * d);
    for (int a = 0; a < 2 * d; ++a) {
        for (int b = 0; b < 2 * d; ++b) {
            double pb = inv;
            if (b == a) pb = (1.0 + h) * inv;
            if (b == (a ^ 1)) pb = (1.0 - h) * inv;
            std::array<int, 6> y{};
            y[a >> 1] += (a & 1) ? -1 : 1;
            y[b >> 1] += (b & 1) ? -1 : 1;
            law[y] += inv * pb;
        }
    }
    return law;
}

double density_moment_two_step_enumerated(int d, double h, double gamma) {
    const double q = gamma / (1.0 - gamma);
    const double inv = 1.0 / (2.0 * d);
    double s = 0.0;
    for (int a = 0; a < 2 * d; ++a) {
        for (int b = 0; b < 2 * d; ++b) {
            double f = 1.0;
            if (b == a) f = 1.0 + h;
            if (b == (a ^ 1)) f = 1.0 - h;
            s += inv * inv * std::pow(f, -q);
        }
    }
    return s;
}

void write_csv(const DisorderPath& path, std::ostream& os) {
    os << (path.mode == Mode::discrete ? "step" : "time");
    for (int i = 1; i <= path.d; ++i) os << ",dx" << i;
    os << "\n";
    char buf[64];
    for (std::size_t i = 0; i < path.steps.size(); ++i) {
        if (path.mode == Mode::discrete) {
            os << (i + 1);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", path.times[i]);
            os << buf;
        }
        for (int a = 0; a < path.d; ++a) os << "," << (step_axis(path.steps[i]) == a ? step_sign(path.steps[i]) : 0);
        os << "\n";
    }
}

} // namespace pinlab::disorder
