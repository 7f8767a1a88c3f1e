#pragma once

#include "pinlab/common.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pinlab::kernels {

constexpr int kMaxDim = 6;

struct LatticeConfig {
    int d = 1;
    int radius = 0;
};

// Exact n-step probabilities of the simple random walk on Z^d, stored on the
// fundamental domain {a_1 >= a_2 >= ... >= a_d >= 0} of the signed
// permutation group. Points are kept in two lists by parity of |x|_1, each
// ordered by |x|_1, so the support of p_n is a prefix of one list.
class KernelTable {
public:
    static constexpr std::size_t kDefaultBudget = 60'000'000; // stored doubles

    KernelTable() = default;

    int d() const { return d_; }
    int n_max() const { return n_max_; }
    LatticeConfig config() const { return {d_, n_max_}; }
    bool parity_flag() const { return true; }

    // p_n(x) for any x in Z^d (0 outside the support).
    double p(int n, std::span<const int> x) const;
    double p(int n, std::initializer_list<int> x) const {
        return p(n, std::span<const int>(x.begin(), x.size()));
    }

    // Fundamental-domain view of p_n.
    std::size_t domain_size(int n) const { return values_.at(n).size(); }
    std::span<const double> values(int n) const { return values_.at(n); }
    std::span<const int> point(int n, std::size_t i) const;
    std::uint64_t multiplicity(int n, std::size_t i) const;

    // Σ_x p_n(x)^2 = P(X_n = Y_n) for two independent walks.
    double pair_return_mass(int n) const;
    double max_p(int n) const;
    double total_mass(int n) const;
    std::size_t stored_values() const;

    void save(const std::string& path) const;
    static KernelTable load(const std::string& path);

    friend KernelTable build_kernel_table(int d, int n_max, std::size_t budget);
    friend KernelTable make_shape(int d, int n_max);

private:
    std::uint64_t key(std::span<const int> sorted) const;
    void index_points();

    int d_ = 0;
    int n_max_ = 0;
    std::vector<int> pts_[2];                 // flat coordinates, d per point
    std::vector<int> norm_[2];                // |x|_1 per point
    std::vector<std::uint64_t> mult_[2];      // number of images
    std::unordered_map<std::uint64_t, std::uint32_t> index_[2];
    std::vector<std::vector<double>> values_; // values_[n][i] for class n % 2
};

KernelTable build_kernel_table(int d, int n_max,
                               std::size_t budget = KernelTable::kDefaultBudget);

// Shared tables for the whole process. A table covering at least n_max
// steps is returned; when a cache directory is set, tables are persisted
// there as kernel_d<d>_n<n_max>.bin and re-validated by header on load.
std::shared_ptr<const KernelTable> kernel_table(int d, int n_max);
void set_cache_dir(const std::string& dir);
std::string cache_dir();
struct CacheStats {
    std::uint64_t memory_hits = 0;
    std::uint64_t disk_hits = 0;
    std::uint64_t builds = 0;
};
CacheStats cache_stats();

// Canonical fundamental-domain representative of x (absolute values, sorted
// decreasing).
void canonicalize(std::span<const int> x, std::span<int> out);

// ---------------------------------------------------------------------------
// Characteristic functions.
struct CharTriple {
    double phi = 1.0;
    double psi = 1.0;
    std::complex<double> varphi{1.0, 0.0};
};

CharTriple char_triple(std::span<const double> k, double h);

// ---------------------------------------------------------------------------
// Return probabilities and Green functions.

// P_{2n}(0) for the d-dimensional walk, n = 0..n_max (equal to the pair
// return mass p^{X-Y}_n(0)), computed through the dimension recursion.
std::vector<double> pair_return_series(int d, int n_max);

// Asymptotic fit v(n) ≈ n^{-s} Σ_k c_k n^{-k}.
struct PowerTail {
    double s = 0.0;
    std::vector<double> c;
    double at(double n) const;
    // Σ_{n > n0} of the fitted form.
    double sum_beyond(long n0) const;
};
PowerTail fit_power_tail(std::span<const double> v, long n_lo, long n_hi, double s, int terms);

struct GreenOptions {
    long series_terms = 2000; // n0: exact terms before the fitted tail
    int tail_terms = 4;       // terms in the asymptotic tail fit
    int grid = 0;             // trapezoid points per dimension (0 = auto)
    int radial_nodes = 48;
    int angular_nodes = 0;    // 0 = auto
    double r_inner = 0.6;     // cut-off function equals 1 below this radius
    double r_outer = 2.4;     // and 0 above this one
};

struct GreenValues {
    bool divergent = false;
    double g_pair = NAN;
    double g_pair_series = NAN;
    double g_pair_quad = NAN;
    double g_ct = NAN;
    double g_ct_quad = NAN;
    double g_ct_time = NAN;
    double g_even = NAN;
    double g_odd = NAN;
    double gap = NAN;        // closed-form gap integral
    double gap_direct = NAN; // G^{X-Y} - G_{h,odd}
    double error = NAN;      // estimated absolute error of the reported value(s)
    std::string method;
};

GreenValues green_pair(int d, double eps = 1e-8, const GreenOptions& opt = {});
GreenValues green_ct(int d, double rho, double eps = 1e-8, const GreenOptions& opt = {});
GreenValues tilted_greens(int d, double h, double eps = 1e-8, const GreenOptions& opt = {});
// d/dh of the gap integral at h = 0, i.e. (2π)^{-d} d^{-2} ∫ φ⁴Σsin²/((1-φ²)(1-φ⁴)).
double gap_slope_at_zero(int d, const GreenOptions& opt = {});

// Time-integral route for G_1 = ∫_0^∞ p_s(0) ds.
double green_ct_time_integral(int d);

// Memoized values for repeated use inside estimators: G^{X-Y} (series route,
// checked against quadrature once per d) and G_{1+ρ} = G_1/(1+ρ).
double green_pair_value(int d);
double green_ct_value(int d, double rho);

// ---------------------------------------------------------------------------
// Continuous time kernels (rate-1 walk).

// log p^{(1)}_u(m) for m = 0..m_max.
std::vector<double> log_kernel_1d(double u, int m_max);
// Product formula p_t(x) = Π_i p^{(1)}_{t/d}(x_i).
double ct_kernel_point(int d, double t, std::span<const int> x, double eps = 1e-14);
// Same value through direct Bessel evaluation; cheaper for repeated calls at
// small |x|.
double ct_kernel_fast(int d, double t, const int* x);
// Poissonization Σ_n e^{-t} t^n/n! P_n(x), truncated where the Poisson tail
// falls below eps.
double ct_kernel_poisson(int d, double t, std::span<const int> x, double eps);

// Radius R with P(|X_t|_1 > R) <= tail for the rate-1 walk (Poisson bound).
int ct_radius(double t, double tail);

struct EntropyValue {
    double value = 0.0;
    double truncation_bound = 0.0;
};
// Σ_x p_{ρt}(x) log p_t(x).
EntropyValue entropy_sum(int d, double rho, double t);

struct BoundRow {
    double t = 0.0;
    long x = 0;
    int regime = 0; // 1: |x| <= εt, 2: εt < |x| < At, 3: |x| >= At
    double log_p = 0.0;
    double log_bound = 0.0;
    bool holds = false;
};
struct BoundReport {
    double eps = 0.1, A = 2.0;
    double C1 = 0.0, C2 = 1.0, C3 = 0.0;
    std::vector<BoundRow> rows;
    bool all_hold = false;
};
BoundReport kernel_bound_report(std::span<const double> t_grid, std::span<const long> x_grid,
                                double eps = 0.1, double A = 2.0, double C2 = 1.0);

} // namespace pinlab::kernels
