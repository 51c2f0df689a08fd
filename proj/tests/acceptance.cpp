// Runs the acceptance criteria in order and prints one PASS/FAIL line each.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "metatune/acquisition.hpp"
#include "metatune/agents.hpp"
#include "metatune/baselines.hpp"
#include "metatune/behavioral_cloning.hpp"
#include "metatune/config.hpp"
#include "metatune/environments.hpp"
#include "metatune/experiment.hpp"
#include "metatune/gp.hpp"
#include "metatune/replay_buffer.hpp"
#include "oracles.hpp"
#include "pg_oracle.hpp"

using namespace metatune;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---- 1 ----
Outcome gp_oracle() {
    Rng rng(101);
    double worst_mean = 0.0, worst_var = 0.0, worst_interp = 0.0;
    for (int t = 0; t < 50; ++t) {
        const auto n = 1 + rng.uniform_index(12);
        const auto d = 1 + rng.uniform_index(4);
        ObservationDataset data;
        for (std::size_t i = 0; i < n; ++i) {
            UnitVector x(d);
            for (auto& c : x) c = rng.uniform();
            data.add(x, rng.uniform(-2.0, 2.0));
        }
        const auto model = GPModel::fit(data, d);
        const auto& k = model.kernel();
        for (int q = 0; q < 10; ++q) {
            UnitVector x(d);
            for (auto& c : x) c = rng.uniform();
            const auto got = model.predict(x);
            const auto want = oracle::gp_predict(data.points, data.outputs, k.lengthscales, k.signal_variance,
                                                 k.noise_variance + model.jitter(), model.prior_mean(),
                                                 model.output_scale(), x);
            worst_mean = std::max(worst_mean, std::abs(got.mean - want.mean));
            worst_var = std::max(worst_var, std::abs(got.variance - want.variance));
        }
        // Near-duplicate points make any smooth kernel ill-conditioned; scale it to the spacing.
        double spacing = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                double s2 = 0.0;
                for (std::size_t c = 0; c < d; ++c) s2 += std::pow(data.points[i][c] - data.points[j][c], 2);
                spacing = std::min(spacing, std::sqrt(s2));
            }
        const KernelParams floor{std::vector<double>(d, 0.5 * spacing), 1.0, kNoiseFloor};
        const auto interp = GPModel::fit_with_params(data, floor);
        for (std::size_t i = 0; i < n; ++i)
            worst_interp = std::max(worst_interp, std::abs(interp.predict(data.points[i]).mean - data.outputs[i]));
    }
    return {worst_mean < 1e-8 && worst_var < 1e-8 && worst_interp < 1e-6,
            fmt("max |dmean| %.2e, max |dvar| %.2e, max interpolation error %.2e", worst_mean, worst_var, worst_interp)};
}

// ---- 2 ----
Outcome ei_monte_carlo() {
    constexpr int kSamples = 1000000;
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(kSamples);
    for (auto& v : z) v = normal(gen);
    int outside = 0, below_floor = 0;
    double worst_se = 0.0;
    // Monte-Carlo grid: |mean - f*| <= 3 std, so every cell sees >= ~1300 improving samples.
    for (int i = 0; i < 20; ++i) {
        const double gap = -1.5 + 3.0 * i / 19.0;  // mean - f*
        for (int j = 0; j < 20; ++j) {
            const double sd = 0.5 + 2.5 * j / 19.0;
            double sum = 0.0, sum2 = 0.0;
            for (const double v : z) {
                const double imp = std::max(0.0, gap + sd * v);
                sum += imp;
                sum2 += imp * imp;
            }
            const double mc = sum / kSamples;
            const double se = std::sqrt(std::max(0.0, sum2 / kSamples - mc * mc) / kSamples);
            const double dist = std::abs(expected_improvement(gap, sd, 0.0) - mc) / se;
            worst_se = std::max(worst_se, dist);
            outside += dist > 3.0;
        }
    }
    // Floor check on a wide grid, deep into both tails.
    for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 41; ++j) {
            const double gap = -10.0 + 0.5 * i, sd = 1e-3 * std::pow(10.0, 0.15 * j);
            below_floor += expected_improvement(gap, sd, 0.0) < std::max(0.0, gap);
        }
    return {outside == 0 && below_floor == 0,
            fmt("%g of 400 cells beyond 3 SE (worst %.2f SE), %g of 1681 below max(0, mean - f*)", outside, worst_se, below_floor)};
}

// ---- 3 ----
Outcome per_fidelity() {
    const std::vector<std::vector<double>> vectors{{1, 1, 1, 1}, {0.5, 1.0, 2.0, 4.0, 0.1}, {3.0, 0.01, 7.5, 1.2, 0.4, 2.2, 9.0}};
    double worst = 0.0;
    Rng rng(303);
    for (const auto& prio : vectors) {
        for (const double alpha : {0.0, 0.6, 1.0}) {
            ReplayBuffer buf(prio.size(), alpha);
            for (std::size_t i = 0; i < prio.size(); ++i) buf.add({{static_cast<int>(i), {}}, 0, 0.0, {0, {}}, true});
            for (std::size_t i = 0; i < prio.size(); ++i) buf.update_priority(i, prio[i]);
            double norm = 0.0;
            for (double p : prio) norm += std::pow(p, alpha);
            std::vector<double> counts(prio.size(), 0.0);
            const auto batch = buf.sample(100000, 0.5, rng);
            for (auto i : batch.indices) counts[i] += 1.0;
            double tv = 0.0;
            for (std::size_t i = 0; i < prio.size(); ++i) tv += std::abs(counts[i] / 1e5 - std::pow(prio[i], alpha) / norm);
            worst = std::max(worst, 0.5 * tv);
        }
    }
    return {worst < 0.01, fmt("worst total variation %.4f over 9 cases", worst)};
}

// ---- 4 ----
Outcome q_soundness() {
    const auto vi = oracle::grid_value_iteration(5, 5, 1.0, -0.1, 0.95);
    int good = 0, off_path_mismatches = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        GridWorld g(5, 5, 1.0, -0.1);
        QAgent agent(25, 4, QAgentConfig{0.5, 0.95, 0.3, 0.6, 0.4}, 5000);
        Rng rng(seed);
        for (int e = 0; e < 5000; ++e) agent.train_episode(g, rng);
        auto optimal = [&](int s, int a) {
            const auto& ok = vi.optimal_actions[static_cast<std::size_t>(s)];
            return std::find(ok.begin(), ok.end(), a) != ok.end();
        };
        int s = 0, steps = 0;
        bool ok = true;
        while (s != g.goal_state() && steps < g.step_cap()) {
            const int a = agent.greedy_action(Observation{s, {}});
            ok = ok && optimal(s, a);
            s = g.successor(s, a);
            ++steps;
        }
        good += ok && s == g.goal_state() && steps == 8;
        for (int t = 0; t < g.goal_state(); ++t) off_path_mismatches += !optimal(t, agent.greedy_action(Observation{t, {}}));
    }
    return {good == 5, fmt("greedy policy optimal from the start state in %g/5 seeds "
                           "(states never reached by it: %g non-optimal greedy actions in total)",
                           good, off_path_mismatches)};
}

// ---- 5 ----
Outcome pg_correctness() {
    std::mt19937_64 gen(505);
    double worst_grad = 0.0;
    for (int t = 0; t < 20; ++t) worst_grad = std::max(worst_grad, pg_oracle::max_gradient_error(gen));
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution done(0.2);
    double worst_gae = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t len = 1 + static_cast<std::size_t>(t % 30);
        std::vector<double> r(len), v(len), vn(len);
        std::vector<bool> d(len);
        std::unique_ptr<bool[]> flags(new bool[len]);
        for (std::size_t i = 0; i < len; ++i) {
            r[i] = n(gen);
            v[i] = n(gen);
            vn[i] = n(gen);
            flags[i] = d[i] = done(gen);
        }
        const auto want = oracle::gae_double_sum(r, v, vn, d, 0.97, 0.92);
        const auto got = gae_advantages(r, v, vn, std::span<const bool>(flags.get(), len), 0.97, 0.92);
        for (std::size_t i = 0; i < len; ++i) worst_gae = std::max(worst_gae, std::abs(got[i] - want[i]));
    }
    return {worst_grad < 1e-4 && worst_gae < 1e-10,
            fmt("max gradient error %.2e over 20 instances, max GAE error %.2e", worst_grad, worst_gae)};
}

// ---- 6 ----
Outcome bc_efficacy() {
    const auto vi = oracle::grid_value_iteration(5, 5, 1.0, -0.1, 0.95);
    const Policy expert = [&](const Observation& o) { return vi.optimal_actions[static_cast<std::size_t>(o.id)].front(); };
    GridWorld g(5, 5);
    const auto psi = record_demonstrations(expert, g, 5);
    const auto pairs = state_action_pairs(psi.trajectories);
    PGAgent agent(25, 0, 4, PGAgentConfig{});
    Rng rng(606);
    pretrain(agent, psi.trajectories, BcSettings{}, rng);
    std::size_t agree = 0;
    for (const auto& p : pairs) agree += agent.greedy_action(p.state) == p.action;
    const double rate = static_cast<double>(agree) / static_cast<double>(pairs.size());
    return {rate >= 0.95, fmt("agreement %.3f on %g demonstrated pairs", rate, static_cast<double>(pairs.size()))};
}

// ---- 7 ----
Outcome degeneracy() {
    auto config = load_config(fs::path(METATUNE_SOURCE_DIR) / "configs" / "deepsea_desk.json");
    auto problem = config.problem;
    problem.env.size = 6;
    problem.budget = TrainingBudget{200, 20, 3};
    auto s = config.settings;
    s.meta_episodes = 8;
    s.bc_enabled = false;
    s.m = 1;
    s.skip_rollouts = true;
    int identical = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto a = optimize(problem, s, seed, false);
        const auto b = run_baseline(BaselineKind::plain_bo, problem, s, seed, false);
        bool same = a.records.size() == b.records.size();
        for (std::size_t i = 0; same && i < a.records.size(); ++i) {
            const auto& x = a.records[i].theta.values;
            const auto& y = b.records[i].theta.values;
            same = x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
        }
        identical += same;
    }
    return {identical == 6, fmt("theta sequences byte-identical in %g/6 seeds", identical)};
}

// ---- 8-10 share the desk experiment ----
struct DeskRuns {
    ExperimentConfig config;
    fs::path first;
    fs::path second;
    std::vector<ExecutionRecord> records;
    double seconds = 0.0;
};

std::map<OptimizerKind, std::vector<double>> final_best(const std::vector<ExecutionRecord>& runs) {
    std::map<OptimizerKind, std::vector<double>> out;
    for (const auto& r : runs) out[r.optimizer].push_back(r.records.back().best_so_far);
    return out;
}

double mean(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size()); }

Outcome ordering(DeskRuns& desk, const fs::path& scratch) {
    desk.config = load_config(fs::path(METATUNE_SOURCE_DIR) / "configs" / "deepsea_desk.json");
    desk.first = scratch / "run_a";
    RunOptions opt;
    opt.out_root = desk.first;
    opt.record_timing = false;
    opt.jobs = jobs();
    const auto start = std::chrono::steady_clock::now();
    desk.records = run_experiment(desk.config, opt);
    desk.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto best = final_best(desk.records);
    const double optimal = DeepSea(desk.config.problem.env.size, false, Rng(0)).optimal_return();
    const auto& ours = best.at(OptimizerKind::rlopt_bc);
    const int reached = static_cast<int>(std::count_if(ours.begin(), ours.end(), [&](double y) { return y >= 0.9 * optimal; }));
    const double m_bc = mean(ours), m_bo = mean(best.at(OptimizerKind::rlopt)), m_rs = mean(best.at(OptimizerKind::random_search));
    const bool pass = m_bc >= m_bo && m_bc >= m_rs && reached >= 4 && desk.seconds < 600.0;
    std::ostringstream os;
    os << fmt("mean best at meta-episode 10: rlopt_bc %.4f, rlopt %.4f, random_search %.4f; ", m_bc, m_bo, m_rs)
       << fmt("rlopt_bc reached 90%% of %.3f in %g/6 executions; %.1f s", optimal, reached, desk.seconds);
    return {pass, os.str()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        files[fs::relative(e.path(), root).generic_string()] = os.str();
    }
    return files;
}

Outcome determinism(DeskRuns& desk, const fs::path& scratch) {
    desk.second = scratch / "run_b";
    RunOptions opt;
    opt.out_root = desk.second;
    opt.record_timing = false;
    opt.jobs = 1;  // the first run was parallel; the trees must still match
    run_experiment(desk.config, opt);
    const auto a = tree(desk.first), b = tree(desk.second);
    std::size_t differing = 0;
    for (const auto& [path, bytes] : a) {
        const auto it = b.find(path);
        differing += it == b.end() || it->second != bytes;
    }
    for (const auto& [path, bytes] : b) differing += !a.contains(path);
    return {!a.empty() && differing == 0,
            fmt("%g files compared (parallel vs sequential run), %g differ", static_cast<double>(a.size()),
                static_cast<double>(differing))};
}

Outcome range_sensitivity(const DeskRuns& desk, const fs::path& scratch) {
    auto ample = desk.config;
    ample.name = "deepsea_desk_ample";
    ample.problem.space = preset_space(ample.problem.agent, "ample");
    ample.space_preset = "ample";
    ample.optimizers = {OptimizerKind::rlopt_bc};
    RunOptions opt;
    opt.out_root = scratch / "run_ample";
    opt.record_timing = false;
    opt.jobs = jobs();
    const auto runs = run_experiment(ample, opt);
    const double m_ample = mean(final_best(runs).at(OptimizerKind::rlopt_bc));
    const double m_original = mean(final_best(desk.records).at(OptimizerKind::rlopt_bc));
    return {m_ample <= m_original, fmt("rlopt_bc mean best: ample %.4f, original %.4f", m_ample, m_original)};
}

}  // namespace

int main() {
    const fs::path scratch = fs::temp_directory_path() / ("metatune-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    DeskRuns desk;
    struct Criterion {
        int id;
        double limit_s;  // 0: no runtime bound of its own
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, 5.0, gp_oracle},
        {2, 30.0, ei_monte_carlo},
        {3, 5.0, per_fidelity},
        {4, 20.0, q_soundness},
        {5, 0.0, pg_correctness},
        {6, 0.0, bc_efficacy},
        {7, 0.0, degeneracy},
        {8, 600.0, [&] { return ordering(desk, scratch); }},
        {9, 0.0, [&] { return determinism(desk, scratch); }},
        {10, 0.0, [&] { return range_sensitivity(desk, scratch); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0.0 && secs >= c.limit_s) {
            out.pass = false;
            out.detail += fmt(" [over the %.0f s limit]", c.limit_s);
        }
        failures += !out.pass;
        std::printf("CRITERION %d %s: %s (%.2f s)\n", c.id, out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::error_code ec;
    fs::remove_all(scratch, ec);
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
