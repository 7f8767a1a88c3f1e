#include "pinlab/common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace pinlab {

namespace {
std::atomic<unsigned> g_threads{1};

double pairwise_rec(const double* p, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_rec(p, h) + pairwise_rec(p + h, n - h);
}
} // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_rec(v.data(), v.size()); }

McEstimate summarize(std::span<const double> samples, std::uint64_t seed) {
    McEstimate e;
    e.replicas = samples.size();
    e.seed = seed;
    if (samples.empty()) return e;
    const double n = static_cast<double>(samples.size());
    e.mean = pairwise_sum(samples) / n;
    if (samples.size() > 1) {
        std::vector<double> sq(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double dv = samples[i] - e.mean;
            sq[i] = dv * dv;
        }
        double var = pairwise_sum(sq) / (n - 1.0);
        e.stderr_ = std::sqrt(var / n);
    }
    return e;
}

void set_worker_threads(unsigned n) { g_threads = std::max(1u, n); }
unsigned worker_threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(g_threads, n));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err) err = std::current_exception();
                    next = n;
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace pinlab
