#include "metatune/meta_optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "metatune/baselines.hpp"
#include "metatune/errors.hpp"

namespace metatune {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::rlopt_bc: return "rlopt_bc";
        case OptimizerKind::rlopt: return "rlopt";
        case OptimizerKind::random_search: return "random_search";
    }
    return "unknown";
}

OptimizerKind parse_optimizer_kind(const std::string& text) {
    if (text == "rlopt_bc") return OptimizerKind::rlopt_bc;
    if (text == "rlopt") return OptimizerKind::rlopt;
    if (text == "random_search") return OptimizerKind::random_search;
    throw ConfigError("optimizers", "unknown optimizer '" + text + "'");
}

std::map<std::string, double> Problem::resolve(const ThetaVector& theta) const {
    auto values = named_values(space, theta);
    for (const auto& [name, v] : pinned) values.insert_or_assign(name, v);
    return values;
}

int OptimizerSettings::effective_rollout_episodes(const TrainingBudget& budget) const {
    if (rollout_episodes > 0) return rollout_episodes;
    return std::max(3, static_cast<int>(std::lround(0.025 * budget.episodes)));
}

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

// Sample standard deviation with the (n - 1) denominator.
Moments sample_moments(std::span<const double> xs) {
    const auto n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

}  // namespace

AcquisitionResult ei_bc_acquisition(const GPModel& model, const Problem& problem, const OptimizerSettings& settings,
                                    double f_star, const DemonstrationSet& psi, const Rng& rng) {
    if (settings.m < 1) throw ConfigError("m", "must be at least 1");
    Rng batch_rng = rng.derive("batch");
    const auto batch =
        candidate_batch(settings.sampler, problem.space.dim(), static_cast<std::size_t>(settings.batch_size), batch_rng);
    const auto top = top_m_candidates(model, problem.space, batch, f_star, static_cast<std::size_t>(settings.m));

    AcquisitionResult result;
    result.trace.reserve(top.size());
    for (const auto& c : top) {
        CandidateTrace t;
        t.theta = c.theta;
        t.gp_ei = c.ei;
        t.predicted_mean = c.predicted_mean;
        t.predicted_std = c.predicted_std;
        result.trace.push_back(std::move(t));
    }
    result.theta = top.front().theta;
    if (top.size() == 1 || settings.skip_rollouts) return result;

    const int episodes = settings.effective_rollout_episodes(problem.budget);
    if (episodes < 2) throw ConfigError("rollout_episodes", "EI-BC needs at least 2 rollout episodes");

    Rng demo_rng = rng.derive("demos");
    const auto subset = sample_demos(psi, static_cast<std::size_t>(settings.demo_sample), demo_rng);

    double best_ei = -1.0;
    for (std::size_t p = 0; p < top.size(); ++p) {
        auto& trace = result.trace[p];
        const Rng cand = rng.derive("rollout", p);
        auto env = make_environment(problem.env, cand.derive("env"));
        try {
            // The rollout previews the first e episodes of a full run, so schedules span the whole budget.
            auto agent = make_agent(problem.agent, problem.resolve(top[p].theta), *env, problem.budget.episodes,
                                    problem.replay);
            if (settings.bc_enabled) {
                Rng bc_rng = cand.derive("bc");
                pretrain(*agent, subset, settings.bc, bc_rng);
            }
            Rng agent_rng = cand.derive("agent");
            std::vector<double> returns;
            returns.reserve(static_cast<std::size_t>(episodes));
            for (int e = 0; e < episodes; ++e) returns.push_back(agent->train_episode(*env, agent_rng));
            const auto mom = sample_moments(returns);
            trace.rollout_mean = mom.mean;
            trace.rollout_std = mom.sd;
            trace.rollout_ei = expected_improvement(mom.mean, mom.sd, f_star);
        } catch (const NumericalError&) {
            trace.diverged = true;
            trace.rollout_ei = 0.0;
        }
        result.rollout_steps += env->total_steps();
        if (trace.rollout_ei > best_ei) {
            best_ei = trace.rollout_ei;
            result.chosen_rank = p;
        }
    }
    result.theta = top[result.chosen_rank].theta;
    return result;
}

OptimizationResult run_optimizer(OptimizerKind kind, const Problem& problem, const OptimizerSettings& settings,
                                 std::uint64_t seed, bool record_timing) {
    if (settings.meta_episodes < 1) throw ConfigError("meta_episodes", "must be at least 1");
    using Clock = std::chrono::steady_clock;
    const Rng root(seed);
    const auto& space = problem.space;
    const std::size_t dim = space.dim();
    const bool use_bc = kind == OptimizerKind::rlopt_bc;

    OptimizationResult out;
    out.kind = kind;
    out.seed = seed;
    double best = -std::numeric_limits<double>::infinity();

    const auto n_init = static_cast<std::size_t>(std::clamp(settings.n_init, 1, settings.meta_episodes));
    std::vector<UnitVector> bootstrap;
    if (kind != OptimizerKind::random_search) {
        Rng boot_rng = root.derive("bootstrap");
        bootstrap = lhs_unit(dim, n_init, boot_rng);
    }
    RandomSearchState rs;
    rs.radius = settings.random_search_radius;

    for (int k = 0; k < settings.meta_episodes; ++k) {
        const auto started = Clock::now();
        const auto idx = static_cast<std::uint64_t>(k);
        const Rng acq_rng = root.derive("acquisition", idx);
        MetaEpisodeRecord rec;
        rec.index = k + 1;
        rec.seed = seed;

        ThetaVector theta;
        if (kind == OptimizerKind::random_search) {
            Rng step_rng = acq_rng;
            theta = random_search_step(rs, space, step_rng);
        } else if (out.dataset.size() < n_init) {
            theta = denormalize(space, bootstrap[out.dataset.size()]);
        } else {
            const auto model = GPModel::fit(out.dataset, dim);
            if (kind == OptimizerKind::rlopt) {
                theta = plain_bo_step(model, space, best, settings, acq_rng);
            } else {
                auto acq = ei_bc_acquisition(model, problem, settings, best, out.psi, acq_rng);
                theta = std::move(acq.theta);
                rec.rollout_steps = acq.rollout_steps;
                rec.acquisition_trace = std::move(acq.trace);
            }
        }

        std::vector<Trajectory> demos;
        if (use_bc && settings.bc_enabled && !out.psi.empty()) {
            Rng bc_rng = root.derive("bc", idx);
            demos = sample_demos(out.psi, static_cast<std::size_t>(settings.demo_sample), bc_rng);
        }
        const auto run = run_meta_episode(problem.agent, problem.resolve(theta), problem.env, problem.budget,
                                          problem.metric, demos, settings.bc, problem.replay,
                                          root.derive("meta-episode", idx));

        rec.theta = theta;
        rec.y = run.y;
        rec.diverged = run.diverged;
        rec.train_steps = run.train_steps;
        rec.is_new_max = run.y > best;
        if (rec.is_new_max) {
            best = run.y;
            out.best_theta = theta;
            out.best_y = run.y;
            if (use_bc) {
                auto demo_env = make_environment(problem.env, root.derive("demos", idx));
                auto fresh = record_demonstrations(run.final_agent->greedy_policy(), *demo_env, settings.psi_size);
                fresh.source_meta_episode = rec.index;
                fresh.source_score = run.y;
                out.psi = std::move(fresh);
            }
        }
        rec.best_so_far = best;

        const auto u = normalize(space, theta);
        out.dataset.add(u, run.y);
        rs.observe(u, run.y);

        if (record_timing)
            rec.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        out.records.push_back(std::move(rec));
    }
    return out;
}

OptimizationResult optimize(const Problem& problem, const OptimizerSettings& settings, std::uint64_t seed,
                            bool record_timing) {
    return run_optimizer(OptimizerKind::rlopt_bc, problem, settings, seed, record_timing);
}

std::vector<double> running_max(std::span<const double> ys) {
    std::vector<double> out;
    out.reserve(ys.size());
    for (const double y : ys) out.push_back(out.empty() ? y : std::max(out.back(), y));
    return out;
}

namespace {

Moments mean_and_half_width(const std::vector<double>& xs) {
    const auto m = sample_moments(xs);
    const double hw = xs.size() > 1 ? 1.96 * m.sd / std::sqrt(static_cast<double>(xs.size())) : 0.0;
    return {m.mean, hw};
}

}  // namespace

std::vector<ComparisonRow> aggregate_executions(const std::vector<std::pair<std::string, ExecutionScores>>& scores) {
    std::vector<ComparisonRow> rows;
    for (const auto& [name, executions] : scores) {
        if (executions.empty()) continue;
        const std::size_t n = executions.front().size();
        for (const auto& e : executions)
            if (e.size() != n) throw ShapeError("aggregate_executions: executions of '" + name + "' differ in length");
        std::vector<std::vector<double>> bests;
        bests.reserve(executions.size());
        for (const auto& e : executions) bests.push_back(running_max(e));
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> b, r;
            for (std::size_t k = 0; k < executions.size(); ++k) {
                b.push_back(bests[k][i]);
                r.push_back(executions[k][i]);
            }
            const auto best_stats = mean_and_half_width(b);
            const auto reward_stats = mean_and_half_width(r);
            rows.push_back({name, static_cast<int>(i + 1), executions.size(), best_stats.mean, best_stats.sd,
                            reward_stats.mean, reward_stats.sd});
        }
    }
    return rows;
}

std::vector<ComparisonRow> run_comparison(const std::vector<OptimizerKind>& optimizers, const Problem& problem,
                                          const OptimizerSettings& settings, std::span<const std::uint64_t> seeds) {
    if (optimizers.empty()) throw ConfigError("optimizers", "need at least one optimizer");
    std::vector<std::pair<std::string, ExecutionScores>> scores;
    for (const auto kind : optimizers) {
        ExecutionScores runs;
        for (const auto seed : seeds) {
            const auto result = run_optimizer(kind, problem, settings, seed, false);
            std::vector<double> ys;
            for (const auto& r : result.records) ys.push_back(r.y);
            runs.push_back(std::move(ys));
        }
        scores.emplace_back(to_string(kind), std::move(runs));
    }
    return aggregate_executions(scores);
}

}  // namespace metatune
