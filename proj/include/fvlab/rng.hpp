#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fvlab {

// Counter-based generator: a fixed bit-mixing finalizer applied to
// key ^ counter. Streams derived from (master seed, replica index) are
// independent of scheduling order, which keeps every replica reproducible
// no matter how work is distributed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static CounterRng for_replica(std::uint64_t master_seed, std::uint64_t replica) {
        return CounterRng(mix(master_seed ^ mix(replica + 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() { return mix(key_ ^ counter_++); }

    // Uniform on the open interval (0, 1); never returns 0 so that
    // -log(u) is always finite.
    double uniform01() {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
        return -std::log(uniform01()) / rate;
    }

    // Index i with probability weights[i] / total. The caller supplies the
    // precomputed total; a linear cumulative scan is exact enough for the
    // small alphabets used here.
    template <typename Weights>
    int categorical(const Weights& weights, int n, double total) {
        double u = uniform01() * total;
        for (int i = 0; i < n; ++i) {
            u -= weights[i];
            if (u <= 0.0) return i;
        }
        for (int i = n - 1; i >= 0; --i)
            if (weights[i] > 0.0) return i;
        throw std::runtime_error("categorical: no positive weight");
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace fvlab
