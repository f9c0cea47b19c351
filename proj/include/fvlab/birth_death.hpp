#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fvlab/distribution.hpp"
#include "fvlab/linalg.hpp"

namespace fvlab {

// Nearest-neighbor chain on {0..N}: birth[n] is the n -> n+1 rate and
// death[n] the n -> n-1 rate, with birth[N] = death[0] = 0.
struct BirthDeathSpec {
    std::vector<double> birth;
    std::vector<double> death;

    std::size_t top() const { return birth.size() - 1; }  // N
};

inline void validate_birth_death(const BirthDeathSpec& s) {
    if (s.birth.size() != s.death.size() || s.birth.size() < 2)
        throw std::invalid_argument("birth_death: rate vectors must share a length >= 2");
    const std::size_t n = s.top();
    if (s.birth[n] != 0.0 || s.death[0] != 0.0)
        throw std::invalid_argument("birth_death: boundary rates must vanish");
    for (std::size_t k = 0; k <= n; ++k)
        if (s.birth[k] < 0.0 || s.death[k] < 0.0)
            throw std::invalid_argument("birth_death: negative rate");
    for (std::size_t k = 0; k < n; ++k)
        if (!(s.birth[k] > 0.0) || !(s.death[k + 1] > 0.0))
            throw std::invalid_argument("birth_death: interior rate must be positive");
}

inline Matrix birth_death_generator(const BirthDeathSpec& s) {
    const std::size_t n = s.top();
    Matrix g(n + 1, n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        if (k < n) g(k, k + 1) = s.birth[k];
        if (k > 0) g(k, k - 1) = s.death[k];
        g(k, k) = -(s.birth[k] + s.death[k]);
    }
    return g;
}

// Product-form stationary law pi(n) proportional to prod_{k<=n} birth[k-1]/death[k],
// accumulated in log space and normalized by direct summation.
inline FiniteDistribution birth_death_stationary(const BirthDeathSpec& s) {
    validate_birth_death(s);
    const std::size_t n = s.top();
    std::vector<double> logw(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k)
        logw[k] = logw[k - 1] + std::log(s.birth[k - 1]) - std::log(s.death[k]);
    double peak = logw[0];
    for (double v : logw) peak = std::max(peak, v);
    std::vector<double> w(n + 1);
    double total = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        w[k] = std::exp(logw[k] - peak);
        total += w[k];
    }
    for (double& v : w) v /= total;
    return FiniteDistribution{std::move(w)};
}

}  // namespace fvlab
