#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pinlab {

// Module identifiers mixed into every stream key.
enum class Stream : std::uint64_t {
    disorder = 1,
    quenched = 2,
    fracmom = 3,
    renewal = 4,
    pam = 5,
    polymer = 6,
    test = 99,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent random stream for (seed, module, replica). Replica r always
// sees the same numbers, whichever thread happens to run it.
class Rng {
public:
    Rng(std::uint64_t seed, Stream module, std::uint64_t replica) {
        std::uint64_t k = splitmix64(seed);
        k = splitmix64(k ^ static_cast<std::uint64_t>(module));
        k = splitmix64(k ^ replica);
        std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                          static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(module)};
        eng_.seed(seq);
    }

    std::uint64_t next() { return eng_(); }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform integer on [0, n)
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection
        std::uint64_t x = eng_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t l = static_cast<std::uint64_t>(m);
        if (l < n) {
            const std::uint64_t t = (0 - n) % n;
            while (l < t) {
                x = eng_();
                m = static_cast<__uint128_t>(x) * n;
                l = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::uint64_t poisson(double mu) {
        if (mu <= 0.0) return 0;
        std::poisson_distribution<std::uint64_t> dist(mu);
        return dist(eng_);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

} // namespace pinlab
