#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fvlab/configuration.hpp"
#include "fvlab/fv_model.hpp"
#include "fvlab/rng.hpp"

namespace fvlab {

enum class EventCause { mutation, interaction };

struct TrajectoryEvent {
    double time = 0.0;
    int from = 0;  // 0-based site indices
    int to = 0;
    EventCause cause = EventCause::mutation;
};

struct Trajectory {
    std::vector<TrajectoryEvent> events;
    Configuration final_config;
    double horizon = 0.0;
};

namespace detail {

// Per-ordered-pair aggregate rates for the SSA, kept incrementally: an event
// i -> j only perturbs rows i and j (source count changed) and the
// interaction columns i and j (target count changed). A full rebuild every
// 2^16 events bounds floating-point drift in the running total.
class SsaRates {
public:
    SsaRates(const FvModel& m, const Configuration& eta)
        : model_(&m), k_(static_cast<int>(m.q.size)), mut_(k_ * k_, 0.0),
          inter_(k_ * k_, 0.0), combined_(k_ * k_, 0.0) {
        rebuild(eta);
    }

    void rebuild(const Configuration& eta) {
        total_ = 0.0;
        for (int i = 0; i < k_; ++i)
            for (int j = 0; j < k_; ++j) {
                set_pair(eta, i, j);
                total_ += combined_[i * k_ + j];
            }
    }

    void apply_move(const Configuration& eta, int i, int j) {
        for (int s = 0; s < k_; ++s) {
            update_pair(eta, i, s);
            update_pair(eta, j, s);
            update_pair(eta, s, i);
            update_pair(eta, s, j);
        }
    }

    double total() const { return total_; }
    const std::vector<double>& combined() const { return combined_; }
    double mutation_part(int idx) const { return mut_[idx]; }
    int sites() const { return k_; }

private:
    void set_pair(const Configuration& eta, int i, int j) {
        const int idx = i * k_ + j;
        if (i == j || eta.counts[i] == 0) {
            mut_[idx] = inter_[idx] = combined_[idx] = 0.0;
            return;
        }
        const double n1 = model_->n_particles - 1;
        mut_[idx] = eta.counts[i] * model_->q.generator(i + 1, j + 1);
        inter_[idx] = eta.counts[i] * model_->q.absorption[i] * eta.counts[j] / n1;
        combined_[idx] = mut_[idx] + inter_[idx];
    }

    void update_pair(const Configuration& eta, int i, int j) {
        const int idx = i * k_ + j;
        const double before = combined_[idx];
        set_pair(eta, i, j);
        total_ += combined_[idx] - before;
    }

    const FvModel* model_;
    int k_;
    std::vector<double> mut_, inter_, combined_;
    double total_ = 0.0;
};

}  // namespace detail

// Exact stochastic simulation of the occupation dynamics: exponential holding
// time at the total outflow rate, move sampled proportionally to its rate.
inline Trajectory simulate(const FvModel& m, const Configuration& eta0, double horizon,
                           CounterRng& rng, bool record_events = true) {
    if (horizon < 0.0) throw std::domain_error("simulate: negative horizon");
    validate_configuration(eta0, m.n_particles);
    const int k = static_cast<int>(m.q.size);
    if (static_cast<int>(eta0.counts.size()) != k)
        throw std::invalid_argument("simulate: site count mismatch");

    Trajectory traj;
    traj.horizon = horizon;
    Configuration eta = eta0;
    detail::SsaRates rates(m, eta);
    double t = 0.0;
    std::uint64_t events_since_rebuild = 0;
    while (true) {
        const double total = rates.total();
        if (!(total > 0.0)) break;
        t += rng.exponential(total);
        if (t > horizon) break;
        const int idx = rng.categorical(rates.combined(), k * k, total);
        const int i = idx / k;
        const int j = idx % k;
        const EventCause cause =
            (rng.uniform01() * rates.combined()[idx] < rates.mutation_part(idx))
                ? EventCause::mutation
                : EventCause::interaction;
        eta.counts[i] -= 1;
        eta.counts[j] += 1;
        if (record_events) traj.events.push_back(TrajectoryEvent{t, i, j, cause});
        if (++events_since_rebuild >= (1u << 16)) {
            rates.rebuild(eta);
            events_since_rebuild = 0;
        } else {
            rates.apply_move(eta, i, j);
        }
    }
    traj.final_config = std::move(eta);
    return traj;
}

}  // namespace fvlab
