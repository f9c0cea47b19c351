#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fvlab/configuration.hpp"
#include "fvlab/fv_model.hpp"
#include "fvlab/rng.hpp"
#include "fvlab/simulate.hpp"

namespace fvlab {

// One transition of the coupled pair; -1 site markers mean the copy did not
// move in this event.
struct CoupledEvent {
    double time = 0.0;
    int from_a = -1, to_a = -1;
    int from_b = -1, to_b = -1;
    EventCause cause = EventCause::mutation;
};

struct CoupledTrajectory {
    std::vector<CoupledEvent> events;
    Configuration final_a, final_b;
    // Snapshots of both copies at the requested checkpoint times.
    std::vector<std::pair<Configuration, Configuration>> checkpoints;
    bool swapped = false;  // two-point ordering swapped the input pair
};

namespace detail {

inline bool is_constant_rate_graph(const FvModel& m, double& jump, double& kill) {
    const std::size_t k = m.q.size;
    if (k < 2) return false;
    jump = m.q.generator(1, 2);
    kill = m.q.absorption[0];
    for (std::size_t i = 0; i < k; ++i) {
        if (std::abs(m.q.absorption[i] - kill) > 1e-12 * (1.0 + std::abs(kill))) return false;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            if (std::abs(m.q.generator(i + 1, j + 1) - jump) > 1e-12 * (1.0 + std::abs(jump)))
                return false;
        }
    }
    return jump > 0.0;
}

// Ordered coupling for the two-site model, tracking n = eta(1) of both
// copies with n <= n'. Off the diagonal the ten transition rows of the
// coupled generator apply; on the diagonal the copies move synchronously.
inline CoupledTrajectory couple_two_point(const FvModel& m, const Configuration& ea,
                                          const Configuration& eb, double horizon,
                                          CounterRng& rng,
                                          const std::vector<double>& checkpoint_times) {
    const int n_p = m.n_particles;
    const double a = m.q.generator(1, 2);
    const double b = m.q.generator(2, 1);
    const double p01 = m.q.absorption[0];
    const double p02 = m.q.absorption[1];
    const double n1 = n_p - 1;

    CoupledTrajectory out;
    int n = ea.counts[0];
    int nn = eb.counts[0];
    if (n > nn) {
        std::swap(n, nn);
        out.swapped = true;
    }

    auto snapshot = [&](int lo, int hi) {
        Configuration ca{{lo, n_p - lo}};
        Configuration cb{{hi, n_p - hi}};
        return out.swapped ? std::make_pair(cb, ca) : std::make_pair(ca, cb);
    };

    struct Row {
        double rate;
        int dn, dnn;
        EventCause cause;
    };
    double t = 0.0;
    std::size_t next_cp = 0;
    std::vector<Row> rows;
    rows.reserve(10);
    std::vector<double> weights(10);
    while (true) {
        rows.clear();
        if (n == nn) {
            const double up = (n_p - n) * (b + p02 * n / n1);
            const double up_mut = (n_p - n) * b;
            const double down = n * (a + p01 * (n_p - n) / n1);
            const double down_mut = n * a;
            rows.push_back({up_mut, +1, +1, EventCause::mutation});
            rows.push_back({up - up_mut, +1, +1, EventCause::interaction});
            rows.push_back({down_mut, -1, -1, EventCause::mutation});
            rows.push_back({down - down_mut, -1, -1, EventCause::interaction});
        } else {
            const double gap = nn - n;
            rows.push_back({n * a, -1, -1, EventCause::mutation});
            rows.push_back({(n_p - nn) * b, +1, +1, EventCause::mutation});
            rows.push_back({gap * b, +1, 0, EventCause::mutation});
            rows.push_back({gap * a, 0, -1, EventCause::mutation});
            rows.push_back({p01 * n * (n_p - nn) / n1, -1, -1, EventCause::interaction});
            rows.push_back({p02 * n * (n_p - nn) / n1, +1, +1, EventCause::interaction});
            rows.push_back({p01 * n * gap / n1, -1, 0, EventCause::interaction});
            rows.push_back({p02 * (n_p - nn) * gap / n1, 0, +1, EventCause::interaction});
            rows.push_back({p02 * n * gap / n1, +1, 0, EventCause::interaction});
            rows.push_back({p01 * (n_p - nn) * gap / n1, 0, -1, EventCause::interaction});
        }
        double total = 0.0;
        weights.resize(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            weights[r] = rows[r].rate;
            total += weights[r];
        }
        double dt = (total > 0.0) ? rng.exponential(total) : horizon + 1.0;
        while (next_cp < checkpoint_times.size() && t + dt > checkpoint_times[next_cp] &&
               checkpoint_times[next_cp] <= horizon) {
            out.checkpoints.push_back(snapshot(n, nn));
            ++next_cp;
        }
        t += dt;
        if (t > horizon || !(total > 0.0)) break;
        const Row& row = rows[rng.categorical(weights, static_cast<int>(rows.size()), total)];
        CoupledEvent ev;
        ev.time = t;
        ev.cause = row.cause;
        if (row.dn != 0) {
            ev.from_a = row.dn > 0 ? 1 : 0;
            ev.to_a = row.dn > 0 ? 0 : 1;
        }
        if (row.dnn != 0) {
            ev.from_b = row.dnn > 0 ? 1 : 0;
            ev.to_b = row.dnn > 0 ? 0 : 1;
        }
        if (out.swapped) {
            std::swap(ev.from_a, ev.from_b);
            std::swap(ev.to_a, ev.to_b);
        }
        out.events.push_back(ev);
        n += row.dn;
        nn += row.dnn;
        if (n > nn) throw std::logic_error("couple_two_point: ordering invariant broken");
    }
    while (next_cp < checkpoint_times.size() && checkpoint_times[next_cp] <= horizon) {
        out.checkpoints.push_back(snapshot(n, nn));
        ++next_cp;
    }
    auto fin = snapshot(n, nn);
    out.final_a = std::move(fin.first);
    out.final_b = std::move(fin.second);
    return out;
}

// Synchronous coupling for constant-rate graphs (the complete graph in
// particular): particles are matched into pairs; each pair shares one
// mutation clock with a common uniform target and one interaction clock with
// a common uniformly-chosen partner pair. Matched pairs never separate under
// mutation, and interaction creates and destroys discrepancies at equal
// rates, so the expected number of discrepant pairs decays like e^{-K q t}.
inline CoupledTrajectory couple_constant_graph(const FvModel& m, const Configuration& ea,
                                               const Configuration& eb, double horizon,
                                               CounterRng& rng,
                                               const std::vector<double>& checkpoint_times,
                                               double jump, double kill) {
    const int k = static_cast<int>(m.q.size);
    const int n_p = m.n_particles;

    // Pair the copies with the maximal site-diagonal matching so the initial
    // discrepancy count equals the configuration distance.
    std::vector<int> c(k * k, 0);
    std::vector<int> rest_a, rest_b;
    for (int x = 0; x < k; ++x) {
        const int matched = std::min(ea.counts[x], eb.counts[x]);
        c[x * k + x] = matched;
        for (int r = 0; r < ea.counts[x] - matched; ++r) rest_a.push_back(x);
        for (int r = 0; r < eb.counts[x] - matched; ++r) rest_b.push_back(x);
    }
    for (std::size_t r = 0; r < rest_a.size(); ++r) c[rest_a[r] * k + rest_b[r]] += 1;

    CoupledTrajectory out;
    auto snapshot = [&]() {
        Configuration ca{std::vector<int>(k, 0)}, cb{std::vector<int>(k, 0)};
        for (int x = 0; x < k; ++x)
            for (int y = 0; y < k; ++y) {
                ca.counts[x] += c[x * k + y];
                cb.counts[y] += c[x * k + y];
            }
        return std::make_pair(ca, cb);
    };

    const double mut_total = static_cast<double>(n_p) * k * jump;
    const double kill_total = static_cast<double>(n_p) * kill;
    const double total = mut_total + kill_total;
    std::vector<double> pair_weights(k * k);
    double t = 0.0;
    std::size_t next_cp = 0;
    while (true) {
        const double dt = (total > 0.0) ? rng.exponential(total) : horizon + 1.0;
        while (next_cp < checkpoint_times.size() && t + dt > checkpoint_times[next_cp] &&
               checkpoint_times[next_cp] <= horizon) {
            out.checkpoints.push_back(snapshot());
            ++next_cp;
        }
        t += dt;
        if (t > horizon || !(total > 0.0)) break;
        const bool mutation = rng.uniform01() * total < mut_total;
        for (int idx = 0; idx < k * k; ++idx) pair_weights[idx] = c[idx];
        const int src = rng.categorical(pair_weights, k * k, static_cast<double>(n_p));
        const int x = src / k, y = src % k;
        CoupledEvent ev;
        ev.time = t;
        int u, v;
        if (mutation) {
            ev.cause = EventCause::mutation;
            u = v = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
        } else {
            ev.cause = EventCause::interaction;
            for (int idx = 0; idx < k * k; ++idx) pair_weights[idx] = c[idx];
            pair_weights[src] -= 1.0;
            const int dst = rng.categorical(pair_weights, k * k, static_cast<double>(n_p - 1));
            u = dst / k;
            v = dst % k;
        }
        if (u == x && v == y) continue;
        c[x * k + y] -= 1;
        c[u * k + v] += 1;
        if (u != x) {
            ev.from_a = x;
            ev.to_a = u;
        }
        if (v != y) {
            ev.from_b = y;
            ev.to_b = v;
        }
        out.events.push_back(ev);
    }
    auto fin = snapshot();
    out.final_a = std::move(fin.first);
    out.final_b = std::move(fin.second);
    return out;
}

}  // namespace detail

// Couples two copies of the same model so their configuration distance
// contracts. Supported model classes: the two-site chain (ordered coupling)
// and constant-rate graphs such as the complete graph (synchronous coupling).
inline CoupledTrajectory simulate_coupled(const FvModel& m, const Configuration& eta0_a,
                                          const Configuration& eta0_b, double horizon,
                                          CounterRng& rng,
                                          const std::vector<double>& checkpoint_times = {}) {
    if (horizon < 0.0) throw std::domain_error("simulate_coupled: negative horizon");
    validate_configuration(eta0_a, m.n_particles);
    validate_configuration(eta0_b, m.n_particles);
    for (std::size_t i = 1; i < checkpoint_times.size(); ++i)
        if (checkpoint_times[i] < checkpoint_times[i - 1])
            throw std::invalid_argument("simulate_coupled: checkpoints must be sorted");
    if (m.q.size == 2)
        return detail::couple_two_point(m, eta0_a, eta0_b, horizon, rng, checkpoint_times);
    double jump = 0.0, kill = 0.0;
    if (detail::is_constant_rate_graph(m, jump, kill))
        return detail::couple_constant_graph(m, eta0_a, eta0_b, horizon, rng, checkpoint_times,
                                             jump, kill);
    throw std::runtime_error("simulate_coupled: no coupling for this model class");
}

}  // namespace fvlab
