#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fvlab/birth_death.hpp"
#include "fvlab/chain.hpp"
#include "fvlab/configuration.hpp"
#include "fvlab/distribution.hpp"
#include "fvlab/fv_model.hpp"

namespace fvlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// K sites with uniform jump rate 1/K between any two and a constant
// absorption rate p everywhere.
struct CompleteGraphParams {
    int sites = 2;       // K
    double kill = 1.0;   // p
    int particles = 2;   // N
};

inline void validate_params(const CompleteGraphParams& cg) {
    if (cg.sites < 2) throw std::invalid_argument("complete_graph: at least two sites");
    if (cg.particles < 2) throw std::invalid_argument("complete_graph: at least two particles");
    if (!(cg.kill > 0.0)) throw std::invalid_argument("complete_graph: kill rate must be positive");
}

inline RateMatrix complete_graph_chain(const CompleteGraphParams& cg) {
    validate_params(cg);
    const int k = cg.sites;
    Matrix off(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) off(i, j) = 1.0 / k;
    return build_rate_matrix(off, std::vector<double>(k, cg.kill));
}

inline FvModel complete_graph_fv(const CompleteGraphParams& cg) {
    return make_fv_model(complete_graph_chain(cg), cg.particles);
}

// log of the unnormalized stationary weight prod_i prod_{j<eta(i)} (N-1+Kpj)/(j+1);
// an empty inner product (eta(i)=0) contributes factor 1.
inline double invariant_log_weight(const CompleteGraphParams& cg, const Configuration& eta) {
    const double n = cg.particles;
    const double kp = cg.sites * cg.kill;
    double lw = 0.0;
    for (int c : eta.counts)
        for (int j = 0; j < c; ++j) lw += std::log(n - 1.0 + kp * j) - std::log(j + 1.0);
    return lw;
}

inline double invariant_weight(const CompleteGraphParams& cg, const Configuration& eta) {
    return std::exp(invariant_log_weight(cg, eta));
}

// Same weight as an exact rational (the double p is treated as the exact
// rational it represents), for the arbitrary-precision cross-check paths.
inline BigRat invariant_weight_rational(const CompleteGraphParams& cg, const Configuration& eta) {
    const BigRat kp = BigRat(cg.sites) * BigRat(cg.kill);
    BigRat w = 1;
    for (int c : eta.counts)
        for (int j = 0; j < c; ++j) w *= (BigRat(cg.particles - 1) + kp * j) / BigRat(j + 1);
    return w;
}

// Stationary law over the lexicographic enumeration of E.
inline FiniteDistribution invariant_law(const CompleteGraphParams& cg, std::uint64_t cap = 200000) {
    validate_params(cg);
    const auto states = enumerate_configurations(cg.sites, cg.particles, cap);
    std::vector<double> lw(states.size());
    double peak = -1e300;
    for (std::size_t s = 0; s < states.size(); ++s) {
        lw[s] = invariant_log_weight(cg, states[s]);
        peak = std::max(peak, lw[s]);
    }
    double total = 0.0;
    std::vector<double> w(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
        w[s] = std::exp(lw[s] - peak);
        total += w[s];
    }
    for (double& v : w) v /= total;
    return FiniteDistribution{std::move(w)};
}

inline BigInt big_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

inline void require_uniform_kill(const CompleteGraphParams& cg) {
    if (std::abs(cg.kill * cg.sites - 1.0) > 1e-12)
        throw std::invalid_argument("complete_graph: this form requires p = 1/K");
}

// Integer weight prod_i C(N-2+eta(i), N-2), valid when p = 1/K.
inline BigInt binomial_weight_integer(const CompleteGraphParams& cg, const Configuration& eta) {
    require_uniform_kill(cg);
    BigInt w = 1;
    for (int c : eta.counts) w *= big_binomial(cg.particles - 2 + c, cg.particles - 2);
    return w;
}

inline BigInt binomial_normalizer(const CompleteGraphParams& cg) {
    require_uniform_kill(cg);
    const std::int64_t k = cg.sites, n = cg.particles;
    return big_binomial((k + 1) * n - k - 1, k * n - k - 1);
}

struct BinomialLaw {
    FiniteDistribution law;
    BigInt normalizer;
};

inline BinomialLaw invariant_law_binomial(const CompleteGraphParams& cg,
                                          std::uint64_t cap = 200000) {
    validate_params(cg);
    require_uniform_kill(cg);
    const auto states = enumerate_configurations(cg.sites, cg.particles, cap);
    const BigInt z = binomial_normalizer(cg);
    std::vector<double> w(states.size());
    double anchor = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const BigInt num = binomial_weight_integer(cg, states[s]);
        w[s] = static_cast<double>(BigRat(num, z));
        // Consistency with the general product weight, up to one global scale.
        const double diff = std::log(static_cast<double>(num)) - invariant_log_weight(cg, states[s]);
        if (s == 0)
            anchor = diff;
        else if (std::abs(diff - anchor) > 1e-9)
            throw std::runtime_error("invariant_law_binomial: weight mismatch with product form");
    }
    return BinomialLaw{FiniteDistribution{std::move(w)}, z};
}

// P(eta(i) = x) under the stationary law when p = 1/K.
inline FiniteDistribution marginal_law(const CompleteGraphParams& cg, int site) {
    validate_params(cg);
    require_uniform_kill(cg);
    if (site < 1 || site > cg.sites) throw std::invalid_argument("marginal_law: bad site");
    const std::int64_t k = cg.sites, n = cg.particles;
    const BigInt z = binomial_normalizer(cg);
    std::vector<double> w(n + 1);
    for (std::int64_t x = 0; x <= n; ++x) {
        const BigInt num =
            big_binomial(n - 2 + x, n - 2) * big_binomial(k * n - k - x, (k - 1) * n - k);
        w[x] = static_cast<double>(BigRat(num, z));
    }
    return FiniteDistribution{std::move(w)};
}

inline double mean_dynamics(const CompleteGraphParams& cg, double mean0, double t) {
    if (t < 0.0) throw std::domain_error("mean_dynamics: negative time");
    const double target = static_cast<double>(cg.particles) / cg.sites;
    return mean0 * std::exp(-t) + target * (1.0 - std::exp(-t));
}

struct MomentTriple {
    double mean_k = 0.0;   // E[eta_0(k)]
    double mean_l = 0.0;   // E[eta_0(l)]
    double cross = 0.0;    // E[eta_0(k) eta_0(l)]
};

inline void validate_moments(const CompleteGraphParams& cg, int k, int l,
                             const MomentTriple& mom) {
    if (k == l) throw std::invalid_argument("covariance_dynamics: sites must differ");
    if (k < 1 || l < 1 || k > cg.sites || l > cg.sites)
        throw std::invalid_argument("covariance_dynamics: bad site");
    const double n = cg.particles;
    if (mom.mean_k < 0.0 || mom.mean_k > n || mom.mean_l < 0.0 || mom.mean_l > n ||
        mom.cross < 0.0 || mom.cross > n * mom.mean_k + 1e-9 ||
        mom.cross > n * mom.mean_l + 1e-9)
        throw std::invalid_argument("covariance_dynamics: inconsistent moments");
}

// cov(eta_t(k), eta_t(l)) for k != l: exact solution of the closed moment
// system, whose cross-moment equation reads
//   d/dt E[eta(k)eta(l)] = -alpha E[eta(k)eta(l)] + ((N-1)/K)(m_k(t)+m_l(t))
// with alpha = 2(N-1+p)/(N-1).
inline double covariance_dynamics(const CompleteGraphParams& cg, int k, int l,
                                  const MomentTriple& mom, double t) {
    validate_params(cg);
    validate_moments(cg, k, l, mom);
    if (t < 0.0) throw std::domain_error("covariance_dynamics: negative time");
    const double n = cg.particles, kk = cg.sites, p = cg.kill;
    const double alpha = 2.0 * (n - 1.0 + p) / (n - 1.0);
    const double drive = (n - 1.0) / kk / (alpha - 1.0);                      // e^{-t} response
    const double limit = n * (n - 1.0) * (n - 1.0) / (kk * kk * (n - 1.0 + p));  // fixed point
    const double sigma0 = mom.mean_k + mom.mean_l - 2.0 * n / kk;
    const double ea = std::exp(-alpha * t), e1 = std::exp(-t);
    const double cross =
        mom.cross * ea + drive * sigma0 * (e1 - ea) + limit * (1.0 - ea);
    const double mk = mean_dynamics(cg, mom.mean_k, t);
    const double ml = mean_dynamics(cg, mom.mean_l, t);
    return cross - mk * ml;
}

// A four-term covariance display kept verbatim as a reference (including the
// unsimplified leading rate). It misses the initial condition and deviates at
// intermediate times; the ODE solution above is authoritative.
inline double covariance_dynamics_reference(const CompleteGraphParams& cg, int k, int l,
                                            const MomentTriple& mom, double t) {
    validate_params(cg);
    validate_moments(cg, k, l, mom);
    const double n = cg.particles, kk = cg.sites, p = cg.kill;
    const double rate = 2.0 * kk * (n - 1.0 + p) / (kk * (n - 1.0));
    const double mid = (-n + 1.0 + 2.0 * p * n) / (kk * (n - 1.0 + 2.0 * p));
    const double tail = (-n * n * (p + 1.0) + n) / (kk * kk * (n - 1.0 + p));
    return mom.cross * std::exp(-rate * t) +
           mid * (mom.mean_k + mom.mean_l) * std::exp(-t) -
           mom.mean_k * mom.mean_l * std::exp(-2.0 * t) + tail;
}

struct StationaryCovariance {
    double variance = 0.0;        // Var(eta(i))
    double covariance = 0.0;      // cov(eta(i), eta(j)), i != j
    double normalized = 0.0;      // cov(eta(i)/N, eta(j)/N)
    double asymptote = 0.0;       // (p+1)/(K^2 N), the large-N size of |normalized|
};

inline StationaryCovariance stationary_covariance(const CompleteGraphParams& cg) {
    validate_params(cg);
    const double n = cg.particles, k = cg.sites, p = cg.kill;
    StationaryCovariance out;
    out.variance = n * (k - 1.0) * (n * p + n - 1.0) / (k * k * (n - 1.0 + p));
    out.covariance = -out.variance / (k - 1.0);
    out.normalized = out.covariance / (n * n);
    out.asymptote = (p + 1.0) / (k * k * n);
    return out;
}

inline double chaos_bound(const CompleteGraphParams& cg) {
    validate_params(cg);
    return std::sqrt(cg.sites * (cg.kill + 1.0) / cg.particles);
}

// Exact E_{nu}[ sum_i |eta(i)/N - 1/K| ] by enumeration, in rational
// arithmetic so the chaos inequality can be checked without roundoff.
inline BigRat exact_l1_to_uniform(const CompleteGraphParams& cg, std::uint64_t cap = 200000) {
    validate_params(cg);
    const auto states = enumerate_configurations(cg.sites, cg.particles, cap);
    const std::int64_t n = cg.particles, k = cg.sites;
    BigRat total_weight = 0, acc = 0;
    for (const auto& eta : states) {
        const BigRat w = invariant_weight_rational(cg, eta);
        BigRat dist = 0;
        for (int c : eta.counts) {
            std::int64_t diff = static_cast<std::int64_t>(k) * c - n;
            if (diff < 0) diff = -diff;
            dist += BigRat(diff, n * k);
        }
        acc += w * dist;
        total_weight += w;
    }
    return acc / total_weight;
}

// lambda_l = l + l(l-1) p/(N-1), the building block of the spectrum.
inline double spectrum_block(const CompleteGraphParams& cg, int l) {
    const double n = cg.particles;
    return l + static_cast<double>(l) * (l - 1.0) * cg.kill / (n - 1.0);
}

// All candidate eigenvalues sum_{i=1..K} lambda_{l_i}, deduplicated.
inline std::vector<double> spectrum_enumeration(const CompleteGraphParams& cg) {
    validate_params(cg);
    std::vector<double> blocks(cg.particles + 1);
    for (int l = 0; l <= cg.particles; ++l) blocks[l] = spectrum_block(cg, l);
    std::vector<double> sums;
    auto rec = [&](auto&& self, int depth, int min_l, double acc) -> void {
        if (depth == cg.sites) {
            sums.push_back(acc);
            return;
        }
        for (int l = min_l; l <= cg.particles; ++l) self(self, depth + 1, l, acc + blocks[l]);
    };
    rec(rec, 0, 0, 0.0);
    std::sort(sums.begin(), sums.end());
    std::vector<double> out;
    for (double v : sums)
        if (out.empty() || v - out.back() > 1e-12) out.push_back(v);
    return out;
}

// Occupation of one site is itself a birth-death chain on {0..N}.
inline BirthDeathSpec marginal_generator(const CompleteGraphParams& cg) {
    validate_params(cg);
    const int n = cg.particles;
    const double k = cg.sites, p = cg.kill, n1 = n - 1.0;
    BirthDeathSpec s;
    s.birth.resize(n + 1);
    s.death.resize(n + 1);
    for (int x = 0; x <= n; ++x) {
        s.birth[x] = (n - x) * (1.0 / k + p * x / n1);
        s.death[x] = x * ((k - 1.0) / k + p * (n - x) / n1);
    }
    return s;
}

}  // namespace fvlab
