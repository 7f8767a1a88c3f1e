#include "pinlab/kernels.hpp"

#include "pinlab/special.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace pinlab::kernels {

namespace {

constexpr int kCoordBits = 10;

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

std::uint64_t images(std::span<const int> a) {
    // a sorted decreasing, nonnegative
    const int d = static_cast<int>(a.size());
    std::uint64_t m = factorial(d);
    int run = 1;
    for (int i = 1; i <= d; ++i) {
        if (i < d && a[i] == a[i - 1]) {
            ++run;
        } else {
            m /= factorial(run);
            run = 1;
        }
    }
    for (int v : a)
        if (v != 0) m *= 2;
    return m;
}

// Enumerate nonincreasing tuples with sum <= maxnorm.
void enumerate(int d, int maxnorm, std::vector<int>& cur, int pos, int cap, int sum,
               std::vector<std::vector<int>>& out) {
    if (pos == d) {
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= cap && sum + v <= maxnorm; ++v) {
        cur[pos] = v;
        enumerate(d, maxnorm, cur, pos + 1, v, sum + v, out);
    }
}

template <typename T>
void write_le(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_le(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw NumericalError("kernel cache: truncated file");
    return v;
}

} // namespace

void canonicalize(std::span<const int> x, std::span<int> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::abs(x[i]);
    std::sort(out.begin(), out.end(), std::greater<int>());
}

std::uint64_t KernelTable::key(std::span<const int> a) const {
    std::uint64_t k = 0;
    for (int v : a) k = (k << kCoordBits) | static_cast<std::uint64_t>(v);
    return k;
}

void KernelTable::index_points() {
    for (int q = 0; q < 2; ++q) {
        index_[q].clear();
        const std::size_t n = norm_[q].size();
        index_[q].reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            index_[q].emplace(key({pts_[q].data() + i * d_, static_cast<std::size_t>(d_)}),
                              static_cast<std::uint32_t>(i));
    }
}

KernelTable make_shape(int d, int n_max) {
    KernelTable t;
    t.d_ = d;
    t.n_max_ = n_max;
    std::vector<std::vector<int>> all;
    std::vector<int> cur(d, 0);
    enumerate(d, n_max, cur, 0, n_max, 0, all);
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        int na = std::accumulate(a.begin(), a.end(), 0), nb = std::accumulate(b.begin(), b.end(), 0);
        if (na != nb) return na < nb;
        return a > b;
    });
    for (const auto& p : all) {
        int nrm = std::accumulate(p.begin(), p.end(), 0);
        int q = nrm & 1;
        t.pts_[q].insert(t.pts_[q].end(), p.begin(), p.end());
        t.norm_[q].push_back(nrm);
        t.mult_[q].push_back(images(p));
    }
    t.index_points();
    return t;
}

KernelTable build_kernel_table(int d, int n_max, std::size_t budget) {
    if (d < 1 || d > kMaxDim) throw InvalidArgument("build_kernel_table: d must be in [1, 6]");
    if (n_max < 0) throw InvalidArgument("build_kernel_table: n_max must be >= 0");
    if (n_max >= (1 << kCoordBits))
        throw BudgetExceeded("build_kernel_table: n_max too large for (d=" + std::to_string(d) +
                             ", n_max=" + std::to_string(n_max) + ")");

    // Refuse oversized tables before allocating anything. The estimate
    // over-counts the fundamental domain (it ignores the ordering constraint
    // beyond a single d! factor).
    {
        double est = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            double c = 1.0;
            for (int i = 1; i <= d; ++i) c *= (n + i) / static_cast<double>(i);
            est += c / static_cast<double>(factorial(d)) / 2.0;
        }
        if (est > static_cast<double>(budget))
            throw BudgetExceeded("kernel table budget exceeded for (d=" + std::to_string(d) +
                                 ", n_max=" + std::to_string(n_max) + ")");
    }

    KernelTable t = make_shape(d, n_max);

    // Neighbour lists: neighbours of a class-q point live in class 1-q.
    std::vector<std::uint32_t> nbr[2];
    const std::uint32_t none = 0xFFFFFFFFu;
    for (int q = 0; q < 2; ++q) {
        const std::size_t np = t.norm_[q].size();
        nbr[q].assign(np * 2 * d, none);
        std::vector<int> y(d), c(d);
        for (std::size_t i = 0; i < np; ++i) {
            const int* x = t.pts_[q].data() + i * d;
            for (int a = 0; a < d; ++a) {
                for (int s = 0; s < 2; ++s) {
                    std::copy(x, x + d, y.begin());
                    y[a] += s ? 1 : -1;
                    canonicalize(y, c);
                    int nrm = std::accumulate(c.begin(), c.end(), 0);
                    if (nrm > n_max) continue;
                    auto it = t.index_[1 - q].find(t.key(c));
                    if (it != t.index_[1 - q].end()) nbr[q][(i * d + a) * 2 + s] = it->second;
                }
            }
        }
    }

    // Prefix lengths: count of class-q points with norm <= n.
    auto prefix = [&](int n) {
        const auto& nm = t.norm_[n & 1];
        return static_cast<std::size_t>(std::upper_bound(nm.begin(), nm.end(), n) - nm.begin());
    };

    t.values_.resize(n_max + 1);
    t.values_[0].assign(1, 1.0);
    const double inv = 1.0 / (2.0 * d);
    for (int n = 1; n <= n_max; ++n) {
        const int q = n & 1;
        const std::size_t cnt = prefix(n);
        auto& out = t.values_[n];
        out.assign(cnt, 0.0);
        const auto& prev = t.values_[n - 1];
        const auto& nb = nbr[q];
        const std::size_t chunk = 4096;
        const std::size_t nchunks = (cnt + chunk - 1) / chunk;
        parallel_for(nchunks, [&](std::size_t c) {
            const std::size_t lo = c * chunk, hi = std::min(cnt, lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) {
                double s = 0.0;
                for (int k = 0; k < 2 * d; ++k) {
                    std::uint32_t j = nb[i * 2 * d + k];
                    if (j != none && j < prev.size()) s += prev[j];
                }
                out[i] = s * inv;
            }
        });
    }
    return t;
}

std::span<const int> KernelTable::point(int n, std::size_t i) const {
    return {pts_[n & 1].data() + i * d_, static_cast<std::size_t>(d_)};
}

std::uint64_t KernelTable::multiplicity(int n, std::size_t i) const { return mult_[n & 1][i]; }

double KernelTable::p(int n, std::span<const int> x) const {
    if (n < 0 || n > n_max_) throw InvalidArgument("KernelTable::p: n out of range");
    if (static_cast<int>(x.size()) != d_) throw InvalidArgument("KernelTable::p: dimension mismatch");
    int c[kMaxDim];
    std::span<int> cs(c, d_);
    canonicalize(x, cs);
    int nrm = 0;
    for (int v : cs) nrm += v;
    if (nrm > n || ((nrm ^ n) & 1)) return 0.0;
    auto it = index_[n & 1].find(key(cs));
    if (it == index_[n & 1].end()) return 0.0;
    const auto& v = values_[n];
    return it->second < v.size() ? v[it->second] : 0.0;
}

double KernelTable::pair_return_mass(int n) const {
    if (n < 0 || n > n_max_) throw InvalidArgument("pair_return_mass: n out of range");
    const auto& v = values_[n];
    const auto& m = mult_[n & 1];
    std::vector<double> terms(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) terms[i] = static_cast<double>(m[i]) * v[i] * v[i];
    return pairwise_sum(terms);
}

double KernelTable::total_mass(int n) const {
    const auto& v = values_.at(n);
    const auto& m = mult_[n & 1];
    std::vector<double> terms(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) terms[i] = static_cast<double>(m[i]) * v[i];
    return pairwise_sum(terms);
}

double KernelTable::max_p(int n) const {
    const auto& v = values_.at(n);
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

std::size_t KernelTable::stored_values() const {
    std::size_t s = 0;
    for (const auto& v : values_) s += v.size();
    return s;
}

void KernelTable::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot write kernel cache: " + tmp);
        os.write("PINK1", 5);
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d_));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(n_max_));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(n_max_)); // radius
        write_le<std::uint8_t>(os, 1);                                   // parity flag
        for (int n = 0; n <= n_max_; ++n) {
            write_le<std::uint64_t>(os, values_[n].size());
            for (double v : values_[n]) write_le<double>(os, v);
        }
        if (!os) throw Error("cannot write kernel cache: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot rename kernel cache: " + path);
}

KernelTable KernelTable::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open kernel cache: " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, "PINK1", 5) != 0) throw NumericalError("kernel cache: bad magic in " + path);
    const int d = static_cast<int>(read_le<std::uint32_t>(is));
    const int n_max = static_cast<int>(read_le<std::uint32_t>(is));
    const int radius = static_cast<int>(read_le<std::uint32_t>(is));
    const auto parity = read_le<std::uint8_t>(is);
    if (d < 1 || d > kMaxDim || radius != n_max || parity != 1)
        throw NumericalError("kernel cache: inconsistent header in " + path);
    KernelTable t = make_shape(d, n_max);
    t.values_.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        const auto cnt = read_le<std::uint64_t>(is);
        const auto& nm = t.norm_[n & 1];
        const auto expect = static_cast<std::uint64_t>(std::upper_bound(nm.begin(), nm.end(), n) - nm.begin());
        if (cnt != expect) throw NumericalError("kernel cache: run length mismatch in " + path);
        t.values_[n].resize(cnt);
        for (auto& v : t.values_[n]) v = read_le<double>(is);
    }
    return t;
}

// ---------------------------------------------------------------------------

CharTriple char_triple(std::span<const double> k, double h) {
    const double d = static_cast<double>(k.size());
    double c = 0.0, s2 = 0.0;
    for (double ki : k) {
        c += std::cos(ki);
        double s = std::sin(ki);
        s2 += s * s;
    }
    CharTriple r;
    r.phi = c / d;
    r.psi = r.phi * r.phi - h / (d * d) * s2;
    r.varphi = {r.phi, k.empty() ? 0.0 : h / d * std::sin(k[0])};
    return r;
}

// ---------------------------------------------------------------------------

std::vector<double> log_kernel_1d(double u, int m_max) { return special::log_scaled_bessel_i(u, m_max); }

double ct_kernel_point(int d, double t, std::span<const int> x, double /*eps*/) {
    if (d < 1 || static_cast<int>(x.size()) != d) throw InvalidArgument("ct_kernel_point: bad dimension");
    if (t < 0.0) throw InvalidArgument("ct_kernel_point: t must be >= 0");
    int mmax = 0;
    for (int v : x) mmax = std::max(mmax, std::abs(v));
    auto lk = log_kernel_1d(t / d, mmax);
    double s = 0.0;
    for (int v : x) s += lk[std::abs(v)];
    return std::exp(s);
}

double ct_kernel_poisson(int d, double t, std::span<const int> x, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("ct_kernel_poisson: eps must be > 0");
    if (t == 0.0) {
        for (int v : x)
            if (v != 0) return 0.0;
        return 1.0;
    }
    const long nmax = special::poisson_upper(t, eps);
    KernelTable tab = build_kernel_table(d, static_cast<int>(nmax));
    double s = 0.0;
    for (long n = 0; n <= nmax; ++n) {
        double w = std::exp(-t + n * std::log(t) - std::lgamma(n + 1.0));
        s += w * tab.p(static_cast<int>(n), x);
    }
    return s;
}

int ct_radius(double t, double tail) { return static_cast<int>(special::poisson_upper(t, tail)); }

namespace {
// Chernoff bound on P(|X_u| > M) for the 1-d rate-1 walk.
double log_tail_1d(double u, double M) {
    if (u <= 0.0) return M >= 0 ? -INFINITY : 0.0;
    double th = std::asinh(M / u);
    return std::log(2.0) + u * (std::cosh(th) - 1.0) - th * M;
}
int radius_1d(double u, double log_tail) {
    int M = 1;
    while (log_tail_1d(u, M) > log_tail) M = static_cast<int>(M * 1.25) + 1;
    return M;
}
} // namespace

EntropyValue entropy_sum(int d, double rho, double t) {
    if (!(t > 0.0)) throw InvalidArgument("entropy_sum: t must be > 0");
    if (rho < 0.0) throw InvalidArgument("entropy_sum: rho must be >= 0");
    const double u = rho * t / d, v = t / d;
    const int M = radius_1d(u, std::log(1e-20));
    auto lq = log_kernel_1d(u, M);
    auto lp = log_kernel_1d(v, M);
    std::vector<double> terms;
    terms.reserve(2 * M + 1);
    for (int m = M; m >= 1; --m) terms.push_back(2.0 * std::exp(lq[m]) * lp[m]);
    terms.push_back(std::exp(lq[0]) * lp[0]);
    EntropyValue r;
    r.value = d * pairwise_sum(terms);
    // beyond M: p_{ρt} mass below e^{log_tail}; |log p_t(m)| <= v + m log(2m/v + 2) + 1
    const double mass = std::exp(log_tail_1d(u, M));
    const double mm = 4.0 * M + 4.0;
    r.truncation_bound = d * mass * (v + mm * std::log(2.0 * mm / std::max(v, 1e-300) + 2.0) + 1.0);
    return r;
}

BoundReport kernel_bound_report(std::span<const double> t_grid, std::span<const long> x_grid, double eps,
                                double A, double C2) {
    BoundReport rep;
    rep.eps = eps;
    rep.A = A;
    rep.C2 = C2;
    double c1 = INFINITY, c3 = 0.0;
    struct Cell {
        double t;
        long x;
        int regime;
        double lp;
    };
    std::vector<Cell> cells;
    for (double t : t_grid) {
        if (!(t > 0.0)) continue; // bounds are stated for large t only
        long xmax = 0;
        for (long x : x_grid) xmax = std::max(xmax, std::labs(x));
        auto lk = log_kernel_1d(t, static_cast<int>(xmax));
        for (long x : x_grid) {
            const long ax = std::labs(x);
            int regime = ax <= eps * t ? 1 : (ax < A * t ? 2 : 3);
            cells.push_back({t, x, regime, lk[ax]});
            if (regime == 1) c1 = std::min(c1, lk[ax] + 0.5 * std::log(t) + C2 * ax * ax / t);
            if (regime == 2) c3 = std::max(c3, -lk[ax] / t);
        }
    }
    rep.C1 = std::isfinite(c1) ? std::exp(c1) : 0.0;
    rep.C3 = c3;
    rep.all_hold = true;
    for (const auto& c : cells) {
        BoundRow r{c.t, c.x, c.regime, c.lp, 0.0, false};
        const double ax = static_cast<double>(std::labs(c.x));
        if (c.regime == 1)
            r.log_bound = std::log(rep.C1) - 0.5 * std::log(c.t) - C2 * ax * ax / c.t;
        else if (c.regime == 2)
            r.log_bound = -rep.C3 * c.t;
        else
            r.log_bound = ax > 1.0 ? -2.0 * ax * std::log(ax) : 0.0;
        r.holds = c.lp >= r.log_bound - 1e-12 * std::fabs(r.log_bound);
        if (c.regime == 1) r.holds = r.holds && rep.C1 > 0.0;
        rep.all_hold = rep.all_hold && r.holds;
        rep.rows.push_back(r);
    }
    return rep;
}

} // namespace pinlab::kernels

namespace pinlab::kernels {

double ct_kernel_fast(int d, double t, const int* x) {
    if (t <= 0.0) {
        for (int i = 0; i < d; ++i)
            if (x[i] != 0) return 0.0;
        return 1.0;
    }
    const double u = t / d;
    double p = 1.0;
    for (int i = 0; i < d; ++i) p *= special::scaled_bessel_i(x[i], u);
    return p;
}

} // namespace pinlab::kernels
