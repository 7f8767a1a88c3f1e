#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinlab {

// Error hierarchy. The CLI maps ConfigError to exit code 1 and every
// NumericalError to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InstanceTooLarge : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ToleranceNotMet : public NumericalError {
public:
    ToleranceNotMet(const std::string& what, double achieved)
        : NumericalError(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

enum class Mode { discrete, continuous };

inline const char* to_string(Mode m) { return m == Mode::discrete ? "discrete" : "continuous"; }

/// Result of any Monte Carlo estimator.
struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;

    double lo(double k = 3.0) const { return mean - k * stderr_; }
    double hi(double k = 3.0) const { return mean + k * stderr_; }
};

// Pairwise summation; the reduction order depends only on the input length,
// never on how the values were produced.
double pairwise_sum(std::span<const double> v);

McEstimate summarize(std::span<const double> samples, std::uint64_t seed);

// Number of worker threads used by replica loops. Results never depend on it.
void set_worker_threads(unsigned n);
unsigned worker_threads();

// Runs fn(i) for i in [0, n). Each index is processed exactly once; callers
// write into slot i of a pre-sized buffer.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

inline double log_add(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

} // namespace pinlab
