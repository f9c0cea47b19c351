#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "fvlab/distribution.hpp"

namespace fvlab {

// Occupation numbers of N particles over the transient sites {1..K},
// stored 0-based: counts[i] is the number of particles on site i+1.
struct Configuration {
    std::vector<int> counts;

    int total() const {
        int s = 0;
        for (int c : counts) s += c;
        return s;
    }
};

inline void validate_configuration(const Configuration& eta, int n_particles) {
    for (int c : eta.counts)
        if (c < 0) throw std::invalid_argument("configuration: negative count");
    if (eta.total() != n_particles)
        throw std::invalid_argument("configuration: counts do not sum to N");
}

// Number of configurations of n particles over k sites: C(n+k-1, k-1).
inline std::uint64_t configuration_count(std::uint64_t n, std::uint64_t k) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i < k; ++i) {
        r = r * (n + i) / i;
    }
    return r;
}

// All configurations in lexicographically ascending order of the counts
// vector; for K=2 the index of a configuration equals counts[0].
inline std::vector<Configuration> enumerate_configurations(int k, int n,
                                                           std::uint64_t cap = 200000) {
    if (k < 1 || n < 0) throw std::invalid_argument("enumerate_configurations: bad shape");
    const std::uint64_t card = configuration_count(n, k);
    if (card > cap)
        throw std::runtime_error("enumerate_configurations: state space exceeds cap, use simulation");
    std::vector<Configuration> out;
    out.reserve(card);
    std::vector<int> counts(k, 0);
    auto rec = [&](auto&& self, int pos, int rem) -> void {
        if (pos == k - 1) {
            counts[pos] = rem;
            out.push_back(Configuration{counts});
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            counts[pos] = v;
            self(self, pos + 1, rem - v);
        }
    };
    rec(rec, 0, n);
    return out;
}

// Rank of a configuration in the lexicographic enumeration above.
inline std::size_t configuration_rank(const Configuration& eta) {
    const int k = static_cast<int>(eta.counts.size());
    int rem = eta.total();
    std::uint64_t rank = 0;
    for (int i = 0; i + 1 < k; ++i) {
        for (int w = 0; w < eta.counts[i]; ++w)
            rank += configuration_count(static_cast<std::uint64_t>(rem - w), k - i - 1);
        rem -= eta.counts[i];
    }
    return static_cast<std::size_t>(rank);
}

// d(eta, eta') = half the l1 distance between occupation vectors; an integer
// for configurations with the same particle count.
inline double config_distance(const Configuration& a, const Configuration& b) {
    if (a.counts.size() != b.counts.size() || a.total() != b.total())
        throw std::invalid_argument("config_distance: configurations not comparable");
    int s = 0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) s += std::abs(a.counts[i] - b.counts[i]);
    return 0.5 * s;
}

inline FiniteDistribution empirical_measure(const Configuration& eta) {
    const double n = eta.total();
    std::vector<double> w(eta.counts.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = eta.counts[i] / n;
    return FiniteDistribution{std::move(w)};
}

}  // namespace fvlab
