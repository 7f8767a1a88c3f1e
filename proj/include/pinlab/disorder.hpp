#pragma once

#include "pinlab/common.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

namespace pinlab::disorder {

// A step is encoded as 2*axis + (negative ? 1 : 0).
inline int step_axis(std::uint8_t s) { return s >> 1; }
inline int step_sign(std::uint8_t s) { return (s & 1) ? -1 : 1; }
inline std::uint8_t make_step(int axis, int sign) {
    return static_cast<std::uint8_t>(2 * axis + (sign < 0 ? 1 : 0));
}
inline std::uint8_t reverse_step(std::uint8_t s) { return static_cast<std::uint8_t>(s ^ 1u); }

struct DisorderPath {
    Mode mode = Mode::discrete;
    int d = 1;
    double horizon = 0.0;          // N (discrete) or t (continuous)
    std::vector<std::uint8_t> steps;
    std::vector<double> times;     // jump times, continuous mode only
    double tilt = 0.0;             // h used to generate the path
    double rate = 0.0;             // jump rate used to generate (continuous)

    std::size_t jump_count() const { return steps.size(); }

    // Positions after each step: flat array of (steps+1) * d integers,
    // starting with Y_0 = 0.
    std::vector<int> positions() const;
    // Y at discrete time n, or Y_t for the right-continuous path.
    std::vector<int> at_step(std::size_t n) const;
    std::vector<int> at_time(double t) const;
};

// Plain simple random walk, N steps.
DisorderPath sample_discrete(int d, long N, std::uint64_t seed, std::uint64_t replica = 0);

// Two-step tilted walk Y^h. Steps 1, 3, 5, ... are uniform; step 2k repeats
// the previous increment with probability (1+h)/(2d), reverses it with
// probability (1-h)/(2d). When N is odd the last step is uniform.
DisorderPath sample_tilted(int d, long N, double h, std::uint64_t seed, std::uint64_t replica = 0);

// Radon–Nikodym derivative of the Y^h law w.r.t. the plain walk on the
// first N = path.steps.size() steps.
double rn_density_discrete(const DisorderPath& path, double h);
// f(n, Y) for every prefix length n = 0..N.
std::vector<double> rn_density_prefix(const DisorderPath& path, double h);

// Continuous-time walk with total jump rate rho on [0, t].
DisorderPath sample_ct(int d, double rho, double t, std::uint64_t seed, std::uint64_t replica = 0);

// e^{-ht} (1 + h/rho)^{N_t}: density of the rate rho+h walk w.r.t. rate rho.
double rn_density_ct(const DisorderPath& path, double rho, double h, double t);

// E^Y[f(N,Y)^{-q}], q = gamma/(1-gamma), closed form.
double density_moment_discrete(int d, double h, double gamma, long N);
// exp{(ρ(1+h/ρ)^{-q} - ρ + q h) t}
double density_moment_ct(double rho, double h, double gamma, double t);
// exp{γ h² t / (2ρ(1-γ)²)}
double density_moment_ct_bound(double rho, double h, double gamma, double t);
// exp{γ h² N / (2d(1-γ)²)}
double density_moment_discrete_bound(int d, double h, double gamma, long N);

// Exact law of Y^h_2 by enumerating the (2d)^2 two-step sequences.
std::map<std::array<int, 6>, double> two_step_law(int d, double h);

// E^Y[f(2,Y)^{-q}] by the same enumeration.
double density_moment_two_step_enumerated(int d, double h, double gamma);

// Debug export: step (or time), dx_1..dx_d.
void write_csv(const DisorderPath& path, std::ostream& os);

} // namespace pinlab::disorder
