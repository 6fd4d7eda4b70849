#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>
#include <vector>

#include "cirl/env.hpp"
#include "cirl/policy.hpp"

namespace cirl {

/// Maps an observation to the next action; fills *gains_out when the
/// controller has a PID layer.
using Controller =
    std::function<Action(const Observation&, const Action& prev_u, double dt,
                         PidGainSet* gains_out)>;

inline Controller make_cirl_controller(PolicyParams p) {
    return [p = std::move(p)](const Observation& obs, const Action& prev_u, double dt,
                              PidGainSet* gains_out) {
        const CirlStep s = cirl_act(p, obs, prev_u, dt);
        if (gains_out) *gains_out = s.gains;
        return s.action;
    };
}

inline Controller make_purerl_controller(PolicyParams p) {
    return [p = std::move(p)](const Observation& obs, const Action&, double,
                              PidGainSet*) { return purerl_act(p, obs); };
}

inline Controller make_static_pid_controller(PidGainSet g) {
    return [g](const Observation& obs, const Action& prev_u, double dt,
               PidGainSet* gains_out) {
        if (gains_out) *gains_out = g;
        return pid_step(g, obs, prev_u, dt);
    };
}

inline Controller make_policy_controller(PolicyParams p) {
    return p.kind == PolicyKind::cirl ? make_cirl_controller(std::move(p))
                                      : make_purerl_controller(std::move(p));
}

// --- Rollout -----------------------------------------------------------------

struct StepRecord {
    int step = 0;
    FullState state{};
    Measurement meas{};
    Setpoint sp{};
    Action u{};
    double reward = 0.0;
    bool has_gains = false;
    PidGainSet gains{};
};

struct EpisodeTrace {
    std::vector<StepRecord> steps;
    double total_reward = 0.0;
};

/// One full episode, recording every step.
inline EpisodeTrace run_episode(const Controller& ctl, const Scenario& scenario,
                                std::uint64_t seed, int substeps = 10) {
    Environment env(scenario, seed, substeps);
    Observation obs = env.observation();
    Action prev_u = env.prev_action();
    EpisodeTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(scenario.n_s));
    for (int t = 0; t < scenario.n_s; ++t) {
        PidGainSet gains;
        gains.cb.k_p = std::numeric_limits<double>::quiet_NaN();  // overwritten by PID heads
        const Action u = ctl(obs, prev_u, kControlDt, &gains);
        const auto res = env.step(u);
        StepRecord rec;
        rec.step = t;
        rec.state = res.true_state;
        rec.meas = res.obs.measured[0];
        rec.sp = res.setpoint;
        rec.u = res.applied;
        rec.reward = res.reward;
        rec.has_gains = !std::isnan(gains.cb.k_p);
        rec.gains = gains;
        trace.steps.push_back(rec);
        trace.total_reward += res.reward;
        obs = res.obs;
        prev_u = res.applied;
    }
    return trace;
}

/// Cumulative undiscounted episode reward.
inline double rollout(const Controller& ctl, const Scenario& scenario, std::uint64_t seed,
                      int substeps = 10) {
    Environment env(scenario, seed, substeps);
    Observation obs = env.observation();
    Action prev_u = env.prev_action();
    double total = 0.0;
    for (int t = 0; t < scenario.n_s; ++t) {
        const Action u = ctl(obs, prev_u, kControlDt, nullptr);
        const auto res = env.step(u);
        total += res.reward;
        obs = res.obs;
        prev_u = res.applied;
    }
    return total;
}

/// Seed of sub-episode `sub` within evaluation episode `ep`; episode seeds
/// advance as seed_base + ep.
inline std::uint64_t episode_seed(std::uint64_t seed_base, int ep, int sub) {
    return mix_seed(seed_base + static_cast<std::uint64_t>(ep)) +
           static_cast<std::uint64_t>(sub);
}

/// Fitness: mean over n_e episodes of the reward summed across all
/// sub-episode scenarios.
inline double evaluate(const Controller& ctl, const std::vector<Scenario>& scenario_set,
                       int n_e, std::uint64_t seed_base, int substeps = 10) {
    double acc = 0.0;
    for (int ep = 0; ep < n_e; ++ep)
        for (std::size_t sub = 0; sub < scenario_set.size(); ++sub)
            acc += rollout(ctl, scenario_set[sub], episode_seed(seed_base, ep, static_cast<int>(sub)),
                           substeps);
    return acc / n_e;
}

// --- Generic maximizers ------------------------------------------------------

using Objective = std::function<double(const std::vector<double>&)>;

/// Evaluates a batch of candidates, optionally across threads. Results are
/// written by candidate index, so the outcome is independent of scheduling.
inline std::vector<double> eval_batch(const std::vector<std::vector<double>>& xs,
                                      const Objective& f, int n_threads = 1) {
    std::vector<double> out(xs.size());
    if (n_threads <= 1 || xs.size() <= 1) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= xs.size()) return;
            out[i] = f(xs[i]);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(n_threads, static_cast<int>(xs.size()));
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

struct SwarmConfig {
    double w = 0.6;       ///< inertia
    double c1 = 1.0;      ///< cognitive acceleration
    double c2 = 1.0;      ///< social acceleration
    int n_init = 30;      ///< random-search population N
    int n_particles = 15; ///< swarm size n_p
    int n_iters = 150;    ///< PSO iterations T
    int n_episodes = 3;   ///< episodes per fitness evaluation n_e
    int n_steps = 120;    ///< steps per rollout n_s
    std::uint64_t seed = 0;
    bool per_dimension_r = false;  ///< draw r1, r2 per dimension instead of scalars
    int n_threads = 1;
};

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> best_position;
    double best_fitness = 0.0;
};

/// Velocity and position update with given r1, r2 scalars.
inline void pso_update_with(Particle& p, const std::vector<double>& global_best,
                            const SwarmConfig& cfg, double r1, double r2) {
    for (std::size_t d = 0; d < p.position.size(); ++d) {
        p.velocity[d] = cfg.w * p.velocity[d] + cfg.c1 * r1 * (p.best_position[d] - p.position[d]) +
                        cfg.c2 * r2 * (global_best[d] - p.position[d]);
        p.position[d] += p.velocity[d];
    }
}

/// Velocity and position update for one particle. r1, r2 are fresh U[0,1]
/// draws from `rng` (scalar per update by default, per-dimension when
/// configured).
inline void pso_update(Particle& p, const std::vector<double>& global_best,
                       const SwarmConfig& cfg, Rng& rng) {
    if (!cfg.per_dimension_r) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        pso_update_with(p, global_best, cfg, r1, r2);
        return;
    }
    for (std::size_t d = 0; d < p.position.size(); ++d) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        p.velocity[d] = cfg.w * p.velocity[d] + cfg.c1 * r1 * (p.best_position[d] - p.position[d]) +
                        cfg.c2 * r2 * (global_best[d] - p.position[d]);
        p.position[d] += p.velocity[d];
    }
}

struct IterationStats {
    int iteration = 0;
    double best_fitness = 0.0;  ///< global best so far
    double mean_fitness = 0.0;  ///< over this iteration's evaluations
    double min_fitness = 0.0;
    double wall_time_s = 0.0;
};

struct RandomSearchResult {
    std::vector<std::vector<double>> population;
    std::vector<double> fitness;
    std::size_t best_index = 0;
};

/// Draws N vectors uniformly in [lo, hi]^dim and evaluates them. Ties break
/// toward the lowest index.
inline RandomSearchResult random_search_init(int n, int dim, double lo, double hi,
                                             std::uint64_t seed, const Objective& f,
                                             int n_threads = 1) {
    if (n < 1) throw std::invalid_argument("random_search_init: n must be >= 1");
    Rng rng(mix_seed(seed));
    RandomSearchResult res;
    res.population.resize(static_cast<std::size_t>(n));
    for (auto& v : res.population) {
        v.resize(static_cast<std::size_t>(dim));
        for (auto& x : v) x = rng.uniform(lo, hi);
    }
    res.fitness = eval_batch(res.population, f, n_threads);
    for (std::size_t i = 1; i < res.fitness.size(); ++i)
        if (res.fitness[i] > res.fitness[res.best_index]) res.best_index = i;
    return res;
}

struct OptimResult {
    std::vector<double> best;
    double best_fitness = 0.0;
    std::vector<IterationStats> history;
    long evaluations = 0;  ///< objective calls consumed
};

namespace detail {

/// Shared PSO iteration loop. Best-so-far bookkeeping runs after each
/// evaluation batch in particle-index order.
inline void pso_iterate(const SwarmConfig& cfg, std::vector<Particle>& swarm, OptimResult& out,
                        const Objective& f, Rng& rng,
                        std::chrono::steady_clock::time_point t0) {
    const std::size_t n_p = swarm.size();
    std::vector<std::vector<double>> candidates(n_p);
    for (int it = 0; it < cfg.n_iters; ++it) {
        for (auto& p : swarm) pso_update(p, out.best, cfg, rng);
        for (std::size_t i = 0; i < n_p; ++i) candidates[i] = swarm[i].position;
        const auto fit = eval_batch(candidates, f, cfg.n_threads);
        out.evaluations += static_cast<long>(n_p);
        for (std::size_t i = 0; i < n_p; ++i) {
            auto& p = swarm[i];
            if (fit[i] > p.best_fitness) {
                p.best_fitness = fit[i];
                p.best_position = p.position;
            }
            if (fit[i] > out.best_fitness) {
                out.best_fitness = fit[i];
                out.best = p.position;
            }
        }
        IterationStats st;
        st.iteration = it;
        st.best_fitness = out.best_fitness;
        st.mean_fitness = std::accumulate(fit.begin(), fit.end(), 0.0) / fit.size();
        st.min_fitness = *std::min_element(fit.begin(), fit.end());
        st.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.history.push_back(st);
    }
}

} // namespace detail

/// Random-search seeding followed by global-best PSO.
inline OptimResult pso_optimize(const SwarmConfig& cfg, int dim, const Objective& f,
                                double init_lo = -1.0, double init_hi = 1.0) {
    const auto t0 = std::chrono::steady_clock::now();
    auto rs = random_search_init(cfg.n_init, dim, init_lo, init_hi, cfg.seed, f, cfg.n_threads);

    OptimResult out;
    out.evaluations = cfg.n_init;

    // Top n_p initial vectors seed the swarm with zero velocity.
    std::vector<std::size_t> order(rs.population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rs.fitness[a] > rs.fitness[b]; });
    const int n_p = std::min<int>(cfg.n_particles, static_cast<int>(order.size()));
    std::vector<Particle> swarm(static_cast<std::size_t>(n_p));
    for (int i = 0; i < n_p; ++i) {
        auto& p = swarm[static_cast<std::size_t>(i)];
        p.position = rs.population[order[static_cast<std::size_t>(i)]];
        p.velocity.assign(p.position.size(), 0.0);
        p.best_position = p.position;
        p.best_fitness = rs.fitness[order[static_cast<std::size_t>(i)]];
    }
    out.best = rs.population[rs.best_index];
    out.best_fitness = rs.fitness[rs.best_index];

    Rng rng(mix_seed(cfg.seed ^ 0x50534Full));
    detail::pso_iterate(cfg, swarm, out, f, rng, t0);
    return out;
}

/// PSO warm-started from an existing parameter vector: the swarm is a cloud
/// of Gaussian perturbations of `center` (particle 0 keeps it exactly), so
/// the search refines an earlier training result on a new objective instead
/// of starting over.
inline OptimResult pso_optimize_warm(const SwarmConfig& cfg, const std::vector<double>& center,
                                     double sigma, const Objective& f) {
    if (center.empty()) throw std::invalid_argument("pso_optimize_warm: empty center");
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(mix_seed(cfg.seed));

    const int n_p = std::max(cfg.n_particles, 1);
    std::vector<Particle> swarm(static_cast<std::size_t>(n_p));
    std::vector<std::vector<double>> pos(swarm.size());
    for (std::size_t i = 0; i < swarm.size(); ++i) {
        auto& p = swarm[i];
        p.position = center;
        for (auto& v : p.position) v += sigma * rng.normal();
        p.velocity.assign(center.size(), 0.0);
        pos[i] = p.position;
    }
    swarm[0].position = center;  // one particle keeps the unperturbed center
    pos[0] = center;
    const auto fit = eval_batch(pos, f, cfg.n_threads);

    OptimResult out;
    out.evaluations = n_p;
    out.best = swarm[0].position;
    out.best_fitness = fit[0];
    for (std::size_t i = 0; i < swarm.size(); ++i) {
        swarm[i].best_position = swarm[i].position;
        swarm[i].best_fitness = fit[i];
        if (fit[i] > out.best_fitness) {
            out.best_fitness = fit[i];
            out.best = swarm[i].position;
        }
    }

    detail::pso_iterate(cfg, swarm, out, f, rng, t0);
    return out;
}

// --- Differential evolution (rand/1/bin), bound-constrained ------------------

struct DeConfig {
    int pop = 20;
    double f = 0.8;
    double cr = 0.9;
    int generations = 100;
    std::uint64_t seed = 0;
    int n_threads = 1;
};

/// Maximizes f over the box [lo, hi]; every candidate ever evaluated is
/// clipped into the box first.
inline OptimResult de_optimize(const DeConfig& cfg, const std::vector<double>& lo,
                               const std::vector<double>& hi, const Objective& f) {
    const std::size_t dim = lo.size();
    if (hi.size() != dim) throw std::invalid_argument("de_optimize: bound size mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(mix_seed(cfg.seed ^ 0x4445ull));

    std::vector<std::vector<double>> pop(static_cast<std::size_t>(cfg.pop));
    for (auto& v : pop) {
        v.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) v[d] = rng.uniform(lo[d], hi[d]);
    }
    auto fit = eval_batch(pop, f, cfg.n_threads);

    OptimResult out;
    out.evaluations = cfg.pop;
    std::size_t best = 0;
    for (std::size_t i = 1; i < fit.size(); ++i)
        if (fit[i] > fit[best]) best = i;
    out.best = pop[best];
    out.best_fitness = fit[best];

    const auto n = static_cast<std::size_t>(cfg.pop);
    std::vector<std::vector<double>> trials(n);
    for (int gen = 0; gen < cfg.generations; ++gen) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t a, b, c;
            do a = static_cast<std::size_t>(rng.uniform() * n); while (a == i);
            do b = static_cast<std::size_t>(rng.uniform() * n); while (b == i || b == a);
            do c = static_cast<std::size_t>(rng.uniform() * n); while (c == i || c == a || c == b);
            auto& trial = trials[i];
            trial = pop[i];
            const std::size_t j_rand = static_cast<std::size_t>(rng.uniform() * dim);
            for (std::size_t d = 0; d < dim; ++d) {
                if (rng.uniform() < cfg.cr || d == j_rand)
                    trial[d] = pop[a][d] + cfg.f * (pop[b][d] - pop[c][d]);
                trial[d] = std::clamp(trial[d], lo[d], hi[d]);
            }
        }
        const auto trial_fit = eval_batch(trials, f, cfg.n_threads);
        out.evaluations += cfg.pop;
        for (std::size_t i = 0; i < n; ++i) {
            if (trial_fit[i] >= fit[i]) {
                pop[i] = trials[i];
                fit[i] = trial_fit[i];
            }
            if (fit[i] > out.best_fitness) {
                out.best_fitness = fit[i];
                out.best = pop[i];
            }
        }
        IterationStats st;
        st.iteration = gen;
        st.best_fitness = out.best_fitness;
        st.mean_fitness = std::accumulate(fit.begin(), fit.end(), 0.0) / fit.size();
        st.min_fitness = *std::min_element(fit.begin(), fit.end());
        st.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.history.push_back(st);
    }
    return out;
}

// --- Domain wiring -----------------------------------------------------------

/// Fitness assigned to candidates whose rollout diverges numerically; far
/// below any reachable episode return so the optimizer discards them.
inline constexpr double kDivergencePenalty = -1e6;

/// Objective over flat policy parameter vectors. Numerical divergence is a
/// property of the candidate, not a program error: it maps to
/// kDivergencePenalty instead of propagating.
inline Objective make_policy_objective(PolicyKind kind, std::vector<Scenario> scenario_set,
                                       int n_e, std::uint64_t seed_base) {
    return [kind, set = std::move(scenario_set), n_e, seed_base](const std::vector<double>& v) {
        const PolicyParams p = PolicyParams::from_vector(kind, v);
        try {
            return evaluate(make_policy_controller(p), set, n_e, seed_base);
        } catch (const DivergenceError&) {
            return kDivergencePenalty;
        }
    };
}

inline PidGainSet gains_from_vector(const std::vector<double>& v) {
    if (v.size() != 6) throw std::invalid_argument("gains_from_vector: expected 6 entries");
    return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

inline std::vector<double> gains_to_vector(const PidGainSet& g) {
    return {g.cb.k_p, g.cb.tau_i, g.cb.tau_d, g.vol.k_p, g.vol.tau_i, g.vol.tau_d};
}

struct DeTuneResult {
    PidGainSet gains;
    double fitness = 0.0;
    std::vector<IterationStats> history;
};

/// Tunes the six static PID gains over the Table-2 box with DE.
inline DeTuneResult de_tune_static_pid(const std::vector<Scenario>& scenario_set,
                                       const DeConfig& cfg, int n_e = 3,
                                       std::uint64_t eval_seed_base = 0,
                                       const GainBounds& bounds = {}) {
    const std::vector<double> lo = {bounds.cb.lo.k_p, bounds.cb.lo.tau_i, bounds.cb.lo.tau_d,
                                    bounds.vol.lo.k_p, bounds.vol.lo.tau_i, bounds.vol.lo.tau_d};
    const std::vector<double> hi = {bounds.cb.hi.k_p, bounds.cb.hi.tau_i, bounds.cb.hi.tau_d,
                                    bounds.vol.hi.k_p, bounds.vol.hi.tau_i, bounds.vol.hi.tau_d};
    Objective f = [&](const std::vector<double>& v) {
        try {
            return evaluate(make_static_pid_controller(gains_from_vector(v)), scenario_set, n_e,
                            eval_seed_base);
        } catch (const DivergenceError&) {
            return kDivergencePenalty;
        }
    };
    const auto res = de_optimize(cfg, lo, hi, f);
    return {gains_from_vector(res.best), res.best_fitness, res.history};
}

/// Static PID gains reported alongside the tuner's result.
inline PidGainSet reference_static_gains() { return {{3.09, 0.03, 0.83}, {0.84, 1.85, 0.08}}; }

} // namespace cirl
