#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fvlab/rng.hpp"

namespace fvlab {

struct McResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t replicas = 0;
};

struct McVectorResult {
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::size_t replicas = 0;
};

namespace detail {

// Runs `work(replica, rng)` for every replica index with a stream derived
// from the master seed, storing into a replica-indexed slot. The reduction
// happens afterwards in index order, so results do not depend on the number
// of workers or their scheduling.
template <typename Work>
void run_replicas(std::size_t replicas, std::uint64_t seed, unsigned threads, Work&& work) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || replicas < 2 * threads) {
        for (std::size_t r = 0; r < replicas; ++r) {
            CounterRng rng = CounterRng::for_replica(seed, r);
            work(r, rng);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&]() {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= replicas) return;
            CounterRng rng = CounterRng::for_replica(seed, r);
            work(r, rng);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Replica-parallel Monte Carlo for a vector observable; per-replica seeds are
// derived deterministically from the master seed.
template <typename F>
McVectorResult mc_estimate_vector(F&& observable, std::size_t n_components, std::size_t replicas,
                                  std::uint64_t seed, unsigned threads = 0) {
    if (replicas < 2) throw std::invalid_argument("mc_estimate: at least two replicas required");
    std::vector<std::vector<double>> samples(replicas);
    detail::run_replicas(replicas, seed, threads, [&](std::size_t r, CounterRng& rng) {
        samples[r] = observable(r, rng);
        if (samples[r].size() != n_components)
            throw std::runtime_error("mc_estimate: component count mismatch");
    });
    McVectorResult res;
    res.replicas = replicas;
    res.mean.assign(n_components, 0.0);
    res.stderr_.assign(n_components, 0.0);
    for (std::size_t r = 0; r < replicas; ++r)
        for (std::size_t c = 0; c < n_components; ++c) res.mean[c] += samples[r][c];
    for (double& m : res.mean) m /= static_cast<double>(replicas);
    for (std::size_t r = 0; r < replicas; ++r)
        for (std::size_t c = 0; c < n_components; ++c) {
            const double d = samples[r][c] - res.mean[c];
            res.stderr_[c] += d * d;
        }
    const double denom = static_cast<double>(replicas) * (static_cast<double>(replicas) - 1.0);
    for (double& s : res.stderr_) s = std::sqrt(s / denom);
    return res;
}

template <typename F>
McResult mc_estimate(F&& observable, std::size_t replicas, std::uint64_t seed,
                     unsigned threads = 0) {
    auto wrapped = [&](std::size_t r, CounterRng& rng) {
        return std::vector<double>{observable(r, rng)};
    };
    McVectorResult v = mc_estimate_vector(wrapped, 1, replicas, seed, threads);
    return McResult{v.mean[0], v.stderr_[0], replicas};
}

}  // namespace fvlab
