#include "metatune/behavioral_cloning.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include <json.hpp>

#include "metatune/errors.hpp"

namespace metatune {

DemonstrationSet record_demonstrations(const Policy& policy, Environment& env, int episodes) {
    if (episodes < 1) throw DomainError("record_demonstrations: episodes must be at least 1");
    DemonstrationSet psi;
    psi.trajectories.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) psi.trajectories.push_back(run_episode(env, policy));
    return psi;
}

std::vector<Trajectory> sample_demos(const DemonstrationSet& psi, std::size_t count, Rng& rng) {
    const std::size_t n = psi.size();
    const std::size_t k = std::min(count, n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<Trajectory> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(psi.trajectories[idx[i]]);
    return out;
}

std::vector<StateActionPair> state_action_pairs(std::span<const Trajectory> demos) {
    std::vector<StateActionPair> pairs;
    for (const auto& traj : demos)
        for (const auto& t : traj.transitions) pairs.push_back({t.state, t.action});
    return pairs;
}

double bc_loss(const ActionDistribution& policy, std::span<const StateActionPair> pairs) {
    if (pairs.empty()) throw DomainError("bc_loss: no state-action pairs");
    double total = 0.0;
    for (const auto& p : pairs) {
        const auto probs = policy(p.state);
        const double pa = probs.at(static_cast<std::size_t>(p.action));
        total -= pa > 0.0 ? std::log(pa) : std::log(std::numeric_limits<double>::min());
    }
    return std::max(0.0, total / static_cast<double>(pairs.size()));
}

double bc_loss(const PGAgent& agent, std::span<const StateActionPair> pairs) {
    return bc_loss([&](const Observation& o) { return agent.action_probabilities(o); }, pairs);
}

PretrainReport pretrain_linear(PGAgent& agent, std::span<const Trajectory> demos, const BcSettings& settings, Rng& rng) {
    PretrainReport report;
    auto pairs = state_action_pairs(demos);
    if (pairs.empty()) return report;

    shuffle(pairs, rng);
    const auto n_val = pairs.size() >= 5
                           ? static_cast<std::size_t>(std::floor(settings.validation_fraction * static_cast<double>(pairs.size())))
                           : std::size_t{0};
    const std::span<const StateActionPair> all(pairs);
    const auto validation = all.first(n_val);
    std::vector<StateActionPair> train(pairs.begin() + static_cast<std::ptrdiff_t>(n_val), pairs.end());

    const double lr = settings.use_theta_lr ? agent.config().alpha_lr : settings.learning_rate;
    auto& params = agent.params();
    const auto na = static_cast<std::size_t>(params.actions);

    double prev_val = std::numeric_limits<double>::infinity();
    int rises = 0;
    for (int epoch = 0; epoch < settings.max_epochs; ++epoch) {
        shuffle(train, rng);
        for (const auto& p : train) {
            const auto x = agent.features(p.state);
            const auto probs = params.probabilities(x);
            for (std::size_t f = 0; f < x.size(); ++f) {
                if (x[f] == 0.0) continue;
                for (std::size_t b = 0; b < na; ++b) {
                    const double target = b == static_cast<std::size_t>(p.action) ? 1.0 : 0.0;
                    params.theta[f * na + b] += lr * (target - probs[b]) * x[f];
                }
            }
        }
        if (!params.is_finite()) throw NumericalError("behavioral cloning diverged");
        report.epochs = epoch + 1;
        if (validation.empty()) continue;
        const double val = bc_loss(agent, validation);
        report.validation_loss = val;
        rises = val > prev_val ? rises + 1 : 0;
        prev_val = val;
        if (rises >= settings.patience) {
            report.stopped_early = true;
            break;
        }
    }
    report.train_loss = bc_loss(agent, train);
    return report;
}

void pretrain_tabular(QAgent& agent, std::span<const Trajectory> demos, const BcSettings& settings) {
    for (const auto& traj : demos) {
        for (const auto& t : traj.transitions) {
            const auto row = agent.q_row(t.state.id);
            double best_other = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < agent.action_count(); ++a)
                if (a != t.action) best_other = std::max(best_other, row[static_cast<std::size_t>(a)]);
            if (!std::isfinite(best_other)) continue;  // single-action environments
            const double current = agent.q(t.state.id, t.action);
            agent.set_q(t.state.id, t.action, std::max(current, best_other + settings.margin));
        }
    }
}

void pretrain(Agent& agent, std::span<const Trajectory> demos, const BcSettings& settings, Rng& rng) {
    if (demos.empty()) return;
    if (auto* q = dynamic_cast<QAgent*>(&agent)) {
        pretrain_tabular(*q, demos, settings);
    } else if (auto* pg = dynamic_cast<PGAgent*>(&agent)) {
        pretrain_linear(*pg, demos, settings, rng);
    } else {
        throw ConfigError("agent", "behavioral cloning does not support this agent type");
    }
}

namespace {

nlohmann::ordered_json encode(const Observation& o) {
    nlohmann::ordered_json j;
    j["id"] = o.id;
    j["features"] = o.features;
    return j;
}

Observation decode(const nlohmann::json& j) {
    return {j.at("id").get<int>(), j.at("features").get<std::vector<double>>()};
}

}  // namespace

void write_demos_jsonl(std::ostream& out, const DemonstrationSet& psi) {
    for (std::size_t e = 0; e < psi.trajectories.size(); ++e) {
        const auto& traj = psi.trajectories[e];
        for (std::size_t s = 0; s < traj.transitions.size(); ++s) {
            const auto& t = traj.transitions[s];
            nlohmann::ordered_json line;
            line["episode"] = e;
            line["step"] = s;
            line["state"] = encode(t.state);
            line["action"] = t.action;
            line["reward"] = t.reward;
            line["next_state"] = encode(t.next_state);
            line["done"] = t.done;
            out << line.dump() << '\n';
        }
    }
}

DemonstrationSet read_demos_jsonl(std::istream& in) {
    DemonstrationSet psi;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError("demos.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        const auto episode = j.at("episode").get<std::size_t>();
        if (episode >= psi.trajectories.size()) psi.trajectories.resize(episode + 1);
        psi.trajectories[episode].append({decode(j.at("state")), j.at("action").get<int>(), j.at("reward").get<double>(),
                                          decode(j.at("next_state")), j.at("done").get<bool>()});
    }
    return psi;
}

}  // namespace metatune
