#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fvlab/chain.hpp"
#include "fvlab/configuration.hpp"
#include "fvlab/linalg.hpp"

namespace fvlab {

// N-particle system driven by an absorbed chain Q: particles mutate with the
// Q rates and, instead of being absorbed, resample onto the site of a
// uniformly chosen other particle.
struct FvModel {
    RateMatrix q;
    int n_particles = 0;
};

inline FvModel make_fv_model(RateMatrix q, int n_particles) {
    if (n_particles < 2) throw std::invalid_argument("fv_model: at least two particles required");
    return FvModel{std::move(q), n_particles};
}

struct ConfigMove {
    int from = 0;  // 0-based site index
    int to = 0;
    double rate = 0.0;         // mutation + interaction
    double mutation = 0.0;     // eta(from) * Q_{from,to}
    double interaction = 0.0;  // eta(from) * p0(from) * eta(to) / (N-1)
};

// Rate of eta -> T_{i->j} eta: eta(i) (Q_{i,j} + Q_{i,0} eta(j)/(N-1)).
inline double move_rate(const FvModel& m, const Configuration& eta, int i, int j) {
    const double n1 = m.n_particles - 1;
    return eta.counts[i] *
           (m.q.generator(i + 1, j + 1) + m.q.absorption[i] * eta.counts[j] / n1);
}

inline std::vector<ConfigMove> transition_rates(const FvModel& m, const Configuration& eta) {
    const int k = static_cast<int>(m.q.size);
    validate_configuration(eta, m.n_particles);
    const double n1 = m.n_particles - 1;
    std::vector<ConfigMove> out;
    for (int i = 0; i < k; ++i) {
        if (eta.counts[i] == 0) continue;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            ConfigMove mv;
            mv.from = i;
            mv.to = j;
            mv.mutation = eta.counts[i] * m.q.generator(i + 1, j + 1);
            mv.interaction = eta.counts[i] * m.q.absorption[i] * eta.counts[j] / n1;
            mv.rate = mv.mutation + mv.interaction;
            if (mv.rate > 0.0) out.push_back(mv);
        }
    }
    return out;
}

// Dense conservative generator over the lexicographic enumeration of E.
inline Matrix fv_generator_matrix(const FvModel& m, std::uint64_t cap = 200000) {
    const int k = static_cast<int>(m.q.size);
    const auto states = enumerate_configurations(k, m.n_particles, cap);
    Matrix gen(states.size(), states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
        double out_rate = 0.0;
        Configuration eta = states[s];
        for (int i = 0; i < k; ++i) {
            if (eta.counts[i] == 0) continue;
            for (int j = 0; j < k; ++j) {
                if (j == i) continue;
                const double r = move_rate(m, eta, i, j);
                if (r <= 0.0) continue;
                eta.counts[i] -= 1;
                eta.counts[j] += 1;
                gen(s, configuration_rank(eta)) = r;
                eta.counts[i] += 1;
                eta.counts[j] -= 1;
                out_rate += r;
            }
        }
        gen(s, s) = -out_rate;
    }
    return gen;
}

}  // namespace fvlab
