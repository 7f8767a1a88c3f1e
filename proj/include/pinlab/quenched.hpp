#pragma once

#include "pinlab/common.hpp"
#include "pinlab/disorder.hpp"
#include "pinlab/kernels.hpp"

#include <string>
#include <vector>

namespace pinlab::quenched {

using disorder::DisorderPath;

enum class Variant { free, pin, pin1, pin2, z1 };
const char* to_string(Variant v);

struct ModelParams {
    Mode mode = Mode::discrete;
    int d = 1;
    double beta = 0.0;
    double rho = 0.0; // Y jump rate, continuous mode

    double z_prime() const { return std::expm1(beta); }
    // z = (e^β - 1) G^{X-Y} (discrete) or β̄ = β G_{1+ρ} (continuous).
    double coupling() const;
};

struct PartitionValue {
    double log_value = 0.0;
    Variant variant = Variant::free;
    double window_lo = 0.0;
    double window_hi = 0.0;
    ModelParams params;
    double error_bound = 0.0; // absolute bound on the value (not its log)
    std::string route;

    double value() const { return std::exp(log_value); }
};

// Brute force over all (2d)^N walks X. Requires (2d)^N <= 1e7.
PartitionValue enumerate_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained);

// Transfer of the weight field over the L∞ box of radius N.
PartitionValue field_dp_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained,
                                  std::size_t budget = 50'000'000);

// O(N²) recursion over the last collision time.
PartitionValue renewal_dp_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained,
                                    const kernels::KernelTable& table);
PartitionValue renewal_dp_partition(const ModelParams& p, const DisorderPath& path, long N, bool constrained);

// Ž^{z,pin}_{j,Y} for j = 0..N (entry 0 is 1 by convention), linear scale.
// zp = z' = e^β - 1.
std::vector<double> pinned_sequence(double zp, const DisorderPath& path, long N, const kernels::KernelTable& table);

// Continuous time, by uniformization on a Poisson-sized box.
PartitionValue ct_partition(const ModelParams& p, const DisorderPath& path, double t, double eps, bool constrained);

struct ModifiedPartitions {
    PartitionValue z1, pin1, pin2;
    PartitionValue free_full; // Z^β_{t,Y} through the same Volterra grid
    PartitionValue pin_full;  // Z^{β,pin}_{t,Y}
    double bound_C = 0.0;     // sup_s β̄ p_s(0) / p_{(1+ρ)s}(0)
    double g_ct = 0.0;        // G_{1+ρ}
    std::size_t nodes = 0;
};

// Volterra recursions on a grid of step dt merged with the jump times of Y.
ModifiedPartitions ct_modified_partitions(const ModelParams& p, const DisorderPath& path, double t, double dt);

struct FreeEnergyReport {
    McEstimate at_N;      // (1/N) log Z^{pin}_N
    McEstimate at_2N;     // (1/2N) log Z^{pin}_{2N}
    McEstimate log_at_N;  // log Z^{pin}_N
    McEstimate log_at_2N; // log Z^{pin}_{2N}
    double horizon = 0.0;
    bool superadditive_ok = false; // a_{2N} >= 2 a_N - 3σ
};

// Replica estimate of (1/N) E^Y log Z^{β,pin}_{N,Y}, also at 2N.
FreeEnergyReport free_energy_estimate(const ModelParams& p, double horizon, std::size_t replicas, std::uint64_t seed,
                                      double eps = 1e-8);

// Per-replica (1/horizon) log Z^{β,pin}: used for paired comparisons.
std::vector<double> free_energy_samples(const ModelParams& p, double horizon, std::size_t replicas,
                                        std::uint64_t seed, double eps = 1e-8);

struct CollisionReport {
    std::vector<double> samples;
    McEstimate mean;
    double log_ratio = 0.0; // mean / log t, d = 2 diagnostic
    double log_ratio_reference = 0.0; // 1 / (π(1+ρ))
};

// Direct simulation of both walks; L counts steps (discrete) or time.
CollisionReport collision_mc(Mode mode, int d, double rho, double horizon, std::size_t replicas, std::uint64_t seed);

} // namespace pinlab::quenched
