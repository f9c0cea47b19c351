#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fvlab {

// Probability vector over an indexed finite set. Producers are expected to
// normalize; `validate` is the cheap guard used at construction sites.
struct FiniteDistribution {
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }
};

inline void validate_distribution(const FiniteDistribution& d, double tol = 1e-12) {
    double total = 0.0;
    for (double w : d.weights) {
        if (w < -tol) throw std::runtime_error("distribution: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > tol)
        throw std::runtime_error("distribution: weights sum to " + std::to_string(total));
}

inline FiniteDistribution normalized(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::runtime_error("normalized: nonpositive mass");
    for (double& w : weights) w /= total;
    return FiniteDistribution{std::move(weights)};
}

// Total variation with the 1/2 * l1 convention.
inline double tv_distance(const FiniteDistribution& a, const FiniteDistribution& b) {
    if (a.size() != b.size()) throw std::invalid_argument("tv_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.weights[i] - b.weights[i]);
    return 0.5 * s;
}

// Plain l1 distance (twice the total variation); the chaos bound is stated
// against this convention, so both are exposed.
inline double l1_distance(const FiniteDistribution& a, const FiniteDistribution& b) {
    return 2.0 * tv_distance(a, b);
}

}  // namespace fvlab
