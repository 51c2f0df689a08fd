#include "metatune/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metatune/errors.hpp"

namespace metatune {

using nlohmann::json;
using nlohmann::ordered_json;

// ---- presets ----

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"original", "broader", "ample"};
    return names;
}

HyperparamSpace preset_space(AgentKind agent, const std::string& preset) {
    const auto lin = Scale::linear;
    const auto log = Scale::log10;
    if (agent == AgentKind::tabular_q_per) {
        // Replay-DQN hyperparameters; "original" uses the reference ranges and
        // the wider sets stretch them the way the range-sensitivity study does.
        if (preset == "original")
            return HyperparamSpace({{"alpha_lr", 1e-5, 1e-1, log},
                                    {"gamma", 0.8, 0.9999, lin},
                                    {"epsilon", 0.1, 0.9, lin},
                                    {"per_alpha", 0.4, 0.8, lin},
                                    {"per_beta", 0.4, 0.8, lin}});
        if (preset == "broader")
            return HyperparamSpace({{"alpha_lr", 1e-6, 1e-1, log},
                                    {"gamma", 0.5, 0.9999, lin},
                                    {"epsilon", 0.05, 0.95, lin},
                                    {"per_alpha", 0.2, 0.9, lin},
                                    {"per_beta", 0.2, 0.9, lin}});
        if (preset == "ample")
            return HyperparamSpace({{"alpha_lr", 1e-8, 1e-1, log},
                                    {"gamma", 0.0001, 0.9999, lin},
                                    {"epsilon", 0.01, 0.99, lin},
                                    {"per_alpha", 0.01, 1.0, lin},
                                    {"per_beta", 0.01, 1.0, lin}});
    } else {
        if (preset == "original")
            return HyperparamSpace({{"alpha_lr", 1e-4, 1e-3, log},
                                    {"gamma", 0.8, 0.9999, lin},
                                    {"gae_lambda", 0.85, 0.9999, lin},
                                    {"entropy_coef", 0.0, 0.1, lin},
                                    {"value_coef", 0.5, 1.0, lin}});
        if (preset == "broader")
            return HyperparamSpace({{"alpha_lr", 1e-5, 1e-3, log},
                                    {"gamma", 0.5, 0.9999, lin},
                                    {"gae_lambda", 0.5, 0.9999, lin},
                                    {"entropy_coef", 0.0, 0.15, lin},
                                    {"value_coef", 0.25, 1.0, lin}});
        if (preset == "ample")
            return HyperparamSpace({{"alpha_lr", 1e-7, 1e-3, log},
                                    {"gamma", 0.0001, 0.9999, lin},
                                    {"gae_lambda", 0.0, 0.9999, lin},
                                    {"entropy_coef", 0.0, 0.2, lin},
                                    {"value_coef", 0.1, 1.0, lin}});
    }
    throw ConfigError("space.preset", "unknown preset '" + preset + "' (expected original, broader or ample)");
}

// ---- parsing helpers ----

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected a JSON object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(join(path_, key), "required field is missing");
        return j_.at(key);
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return as<T>(at(key), join(path_, key));
    }

    template <typename T>
    T require(const std::string& key) {
        return as<T>(at(key), join(path_, key));
    }

    [[nodiscard]] std::string child(const std::string& key) const { return join(path_, key); }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!used_.contains(key)) throw ConfigError(join(path_, key), "unknown key");
    }

    template <typename T>
    static T as(const json& v, const std::string& field) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
                    throw ConfigError(field, "expected a non-negative integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(field, "expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(field, "expected a string");
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

EnvConfig parse_env(const json& j) {
    ObjectReader r(j, "env");
    EnvConfig env;
    env.kind = parse_env_kind(r.require<std::string>("kind"));
    switch (env.kind) {
        case EnvKind::gridworld:
            env.width = r.get<int>("width", env.width);
            env.height = r.get<int>("height", env.height);
            env.goal_reward = r.get<double>("goal_reward", env.goal_reward);
            env.step_reward = r.get<double>("step_reward", env.step_reward);
            break;
        case EnvKind::deep_sea:
            env.size = r.get<int>("size", env.size);
            env.stochastic = r.get<bool>("stochastic", env.stochastic);
            break;
        case EnvKind::umbrella:
            env.chain_length = r.get<int>("chain_length", env.chain_length);
            env.n_distractors = r.get<int>("n_distractors", env.n_distractors);
            break;
    }
    r.finish();
    return env;
}

ordered_json dump_env(const EnvConfig& env) {
    ordered_json j;
    j["kind"] = to_string(env.kind);
    switch (env.kind) {
        case EnvKind::gridworld:
            j["width"] = env.width;
            j["height"] = env.height;
            j["goal_reward"] = env.goal_reward;
            j["step_reward"] = env.step_reward;
            break;
        case EnvKind::deep_sea:
            j["size"] = env.size;
            j["stochastic"] = env.stochastic;
            break;
        case EnvKind::umbrella:
            j["chain_length"] = env.chain_length;
            j["n_distractors"] = env.n_distractors;
            break;
    }
    return j;
}

std::vector<HyperparamDim> parse_dims(const json& j) {
    if (!j.is_array()) throw ConfigError("space.dims", "expected an array");
    std::vector<HyperparamDim> dims;
    for (std::size_t i = 0; i < j.size(); ++i) {
        ObjectReader r(j[i], "space.dims[" + std::to_string(i) + "]");
        HyperparamDim d;
        d.name = r.require<std::string>("name");
        d.low = r.require<double>("low");
        d.high = r.require<double>("high");
        d.scale = parse_scale(r.get<std::string>("scale", "linear"));
        r.finish();
        dims.push_back(std::move(d));
    }
    return dims;
}

// Legal closed range per hyperparameter name.
struct Limits {
    double low;
    double high;
    bool high_exclusive;
};

Limits limits_for(const std::string& name) {
    if (name == "gamma") return {0.0, 1.0, true};
    if (name == "gae_lambda" || name == "epsilon" || name == "per_beta") return {0.0, 1.0, false};
    if (name == "alpha_lr") return {0.0, 10.0, false};
    return {0.0, 1e6, false};
}

void check_value(const std::string& field, double v) {
    const auto lim = limits_for(field);
    const bool ok = v >= lim.low && (lim.high_exclusive ? v < lim.high : v <= lim.high);
    if (!ok) {
        std::ostringstream os;
        os << "value " << v << " outside the legal range " << (lim.high_exclusive ? "[" : "[") << lim.low << ", "
           << lim.high << (lim.high_exclusive ? ")" : "]");
        throw ConfigError(field, os.str());
    }
}

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

// ---- validation ----

void validate(const ExperimentConfig& c) {
    if (c.name.empty()) throw ConfigError("name", "must not be empty");
    if (c.name.find('/') != std::string::npos || c.name == "." || c.name == "..")
        throw ConfigError("name", "must be a plain directory name");
    validate(c.problem.env);

    const auto& expected = hyperparameter_names(c.problem.agent);
    std::set<std::string> covered;
    for (const auto& d : c.problem.space.dims()) {
        if (std::find(expected.begin(), expected.end(), d.name) == expected.end())
            throw ConfigError(d.name, "not a hyperparameter of agent '" + to_string(c.problem.agent) + "'");
        check_value(d.name, d.low);
        check_value(d.name, d.high);
        covered.insert(d.name);
    }
    for (const auto& [name, v] : c.problem.pinned) {
        if (std::find(expected.begin(), expected.end(), name) == expected.end())
            throw ConfigError("pinned." + name, "not a hyperparameter of agent '" + to_string(c.problem.agent) + "'");
        if (covered.contains(name)) throw ConfigError("pinned." + name, "also present in the searched space");
        check_value(name, v);
        covered.insert(name);
    }
    for (const auto& name : expected)
        if (!covered.contains(name)) throw ConfigError(name, "hyperparameter neither searched nor pinned");

    const auto& b = c.problem.budget;
    if (b.episodes < 1) throw ConfigError("training.episodes", "must be at least 1");
    if (b.eval_interval < 1) throw ConfigError("training.eval_interval", "must be at least 1");
    if (b.eval_episodes < 1) throw ConfigError("training.eval_episodes", "must be at least 1");

    const auto& r = c.problem.replay;
    if (r.batch_size < 1) throw ConfigError("replay.batch_size", "must be at least 1");
    if (r.capacity < 1) throw ConfigError("replay.capacity", "must be at least 1");

    const auto& s = c.settings;
    if (s.meta_episodes < 1) throw ConfigError("meta_episodes", "must be at least 1");
    if (s.n_init < 1) throw ConfigError("acquisition.n_init", "must be at least 1");
    if (s.m < 1) throw ConfigError("acquisition.m", "must be at least 1");
    if (s.batch_size < s.m) throw ConfigError("acquisition.batch_size", "must be at least m");
    if (s.rollout_episodes != 0 && s.rollout_episodes < 2)
        throw ConfigError("acquisition.rollout_episodes", "must be 0 (automatic) or at least 2");
    if (s.psi_size < 1) throw ConfigError("demonstrations.size", "must be at least 1");
    if (s.demo_sample < 1) throw ConfigError("demonstrations.sample", "must be at least 1");
    if (s.bc.max_epochs < 1) throw ConfigError("demonstrations.max_epochs", "must be at least 1");
    if (s.bc.patience < 1) throw ConfigError("demonstrations.patience", "must be at least 1");
    if (!(s.bc.learning_rate > 0.0)) throw ConfigError("demonstrations.learning_rate", "must be positive");
    if (!(s.bc.validation_fraction >= 0.0 && s.bc.validation_fraction < 1.0))
        throw ConfigError("demonstrations.validation_fraction", "must lie in [0, 1)");
    if (!(s.random_search_radius > 0.0 && s.random_search_radius <= 1.0))
        throw ConfigError("random_search.radius", "must lie in (0, 1]");

    if (c.optimizers.empty()) throw ConfigError("optimizers", "need at least one optimizer");
    if (std::set<OptimizerKind>(c.optimizers.begin(), c.optimizers.end()).size() != c.optimizers.size())
        throw ConfigError("optimizers", "duplicate optimizer");
    if (c.seeds.empty()) throw ConfigError("seeds", "need at least one seed");
}

// ---- parse / dump ----

ExperimentConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        std::ostringstream os;
        os << "JSON syntax error at line " << line << ", column " << col << ": " << e.what();
        throw ConfigError("", os.str());
    }

    ObjectReader r(root, "");
    ExperimentConfig c;
    c.name = r.require<std::string>("name");
    c.problem.env = parse_env(r.at("env"));
    c.problem.agent = parse_agent_kind(r.require<std::string>("agent"));

    std::vector<HyperparamDim> dims;
    if (r.has("space")) {
        ObjectReader sr(r.at("space"), "space");
        const bool has_preset = sr.has("preset");
        const bool has_dims = sr.has("dims");
        if (has_preset == has_dims) throw ConfigError("space", "give exactly one of 'preset' or 'dims'");
        if (has_preset) {
            c.space_preset = sr.require<std::string>("preset");
            dims = preset_space(c.problem.agent, *c.space_preset).dims();
        } else {
            dims = parse_dims(sr.at("dims"));
        }
        sr.finish();
    } else {
        c.space_preset = "original";
        dims = preset_space(c.problem.agent, "original").dims();
    }

    if (r.has("pinned")) {
        const auto& pj = r.at("pinned");
        if (!pj.is_object()) throw ConfigError("pinned", "expected an object of name -> value");
        for (const auto& [name, v] : pj.items())
            c.problem.pinned[name] = ObjectReader::as<double>(v, "pinned." + name);
    } else {
        r.get<int>("pinned", 0);
    }
    // Pinned dimensions leave the searched space.
    std::erase_if(dims, [&](const HyperparamDim& d) { return c.problem.pinned.contains(d.name); });
    try {
        c.problem.space = HyperparamSpace(std::move(dims));
    } catch (const ConfigError& e) {
        throw ConfigError("space." + e.field(), e.what());
    }

    if (r.has("optimizers")) {
        const auto& oj = r.at("optimizers");
        if (!oj.is_array()) throw ConfigError("optimizers", "expected an array of optimizer names");
        c.optimizers.clear();
        for (const auto& o : oj) c.optimizers.push_back(parse_optimizer_kind(ObjectReader::as<std::string>(o, "optimizers")));
    } else {
        r.get<int>("optimizers", 0);
    }

    c.settings.meta_episodes = r.get<int>("meta_episodes", c.settings.meta_episodes);

    if (r.has("training")) {
        ObjectReader tr(r.at("training"), "training");
        auto& b = c.problem.budget;
        b.episodes = tr.get<int>("episodes", b.episodes);
        b.eval_interval = tr.get<int>("eval_interval", std::max(1, b.episodes / 20));
        b.eval_episodes = tr.get<int>("eval_episodes", b.eval_episodes);
        tr.finish();
    } else {
        r.get<int>("training", 0);
        c.problem.budget.eval_interval = std::max(1, c.problem.budget.episodes / 20);
    }

    c.problem.metric = parse_metric_kind(r.get<std::string>("metric", to_string(c.problem.metric)));

    if (r.has("acquisition")) {
        ObjectReader ar(r.at("acquisition"), "acquisition");
        auto& s = c.settings;
        s.m = ar.get<int>("m", s.m);
        s.batch_size = ar.get<int>("batch_size", s.batch_size);
        const auto sampler = ar.get<std::string>("sampler", "lhs");
        if (sampler == "lhs")
            s.sampler = CandidateSampler::lhs;
        else if (sampler == "uniform")
            s.sampler = CandidateSampler::uniform;
        else
            throw ConfigError("acquisition.sampler", "expected 'lhs' or 'uniform'");
        s.rollout_episodes = ar.get<int>("rollout_episodes", s.rollout_episodes);
        s.n_init = ar.get<int>("n_init", s.n_init);
        s.skip_rollouts = ar.get<bool>("skip_rollouts", s.skip_rollouts);
        ar.finish();
    } else {
        r.get<int>("acquisition", 0);
    }

    if (r.has("demonstrations")) {
        ObjectReader dr(r.at("demonstrations"), "demonstrations");
        auto& s = c.settings;
        s.bc_enabled = dr.get<bool>("enabled", s.bc_enabled);
        s.psi_size = dr.get<int>("size", s.psi_size);
        s.demo_sample = dr.get<int>("sample", s.demo_sample);
        s.bc.learning_rate = dr.get<double>("learning_rate", s.bc.learning_rate);
        s.bc.max_epochs = dr.get<int>("max_epochs", s.bc.max_epochs);
        s.bc.patience = dr.get<int>("patience", s.bc.patience);
        s.bc.validation_fraction = dr.get<double>("validation_fraction", s.bc.validation_fraction);
        s.bc.margin = dr.get<double>("margin", s.bc.margin);
        s.bc.use_theta_lr = dr.get<bool>("use_theta_lr", s.bc.use_theta_lr);
        dr.finish();
    } else {
        r.get<int>("demonstrations", 0);
    }

    if (r.has("replay")) {
        ObjectReader rr(r.at("replay"), "replay");
        auto& p = c.problem.replay;
        p.batch_size = rr.get<std::size_t>("batch_size", p.batch_size);
        p.capacity = rr.get<std::size_t>("capacity", p.capacity);
        p.warmup = rr.get<std::size_t>("warmup", p.warmup);
        rr.finish();
    } else {
        r.get<int>("replay", 0);
    }

    if (r.has("random_search")) {
        ObjectReader sr(r.at("random_search"), "random_search");
        c.settings.random_search_radius = sr.get<double>("radius", c.settings.random_search_radius);
        sr.finish();
    } else {
        r.get<int>("random_search", 0);
    }

    if (r.has("seeds")) {
        const auto& sj = r.at("seeds");
        if (!sj.is_array()) throw ConfigError("seeds", "expected an array of non-negative integers");
        c.seeds.clear();
        for (const auto& s : sj) c.seeds.push_back(ObjectReader::as<std::uint64_t>(s, "seeds"));
    } else {
        r.get<int>("seeds", 0);
    }

    r.finish();
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& c) {
    ordered_json j;
    j["name"] = c.name;
    j["env"] = dump_env(c.problem.env);
    j["agent"] = to_string(c.problem.agent);
    if (c.space_preset) {
        j["space"] = ordered_json{{"preset", *c.space_preset}};
    } else {
        ordered_json dims = ordered_json::array();
        for (const auto& d : c.problem.space.dims())
            dims.push_back(ordered_json{{"name", d.name}, {"low", d.low}, {"high", d.high}, {"scale", to_string(d.scale)}});
        j["space"] = ordered_json{{"dims", dims}};
    }
    ordered_json pinned = ordered_json::object();
    for (const auto& [name, v] : c.problem.pinned) pinned[name] = v;
    j["pinned"] = pinned;
    ordered_json opts = ordered_json::array();
    for (const auto o : c.optimizers) opts.push_back(to_string(o));
    j["optimizers"] = opts;
    j["meta_episodes"] = c.settings.meta_episodes;
    j["training"] = ordered_json{{"episodes", c.problem.budget.episodes},
                                 {"eval_interval", c.problem.budget.eval_interval},
                                 {"eval_episodes", c.problem.budget.eval_episodes}};
    j["metric"] = to_string(c.problem.metric);
    const auto& s = c.settings;
    j["acquisition"] = ordered_json{{"m", s.m},
                                    {"batch_size", s.batch_size},
                                    {"sampler", s.sampler == CandidateSampler::lhs ? "lhs" : "uniform"},
                                    {"rollout_episodes", s.rollout_episodes},
                                    {"n_init", s.n_init},
                                    {"skip_rollouts", s.skip_rollouts}};
    j["demonstrations"] = ordered_json{{"enabled", s.bc_enabled},
                                       {"size", s.psi_size},
                                       {"sample", s.demo_sample},
                                       {"learning_rate", s.bc.learning_rate},
                                       {"max_epochs", s.bc.max_epochs},
                                       {"patience", s.bc.patience},
                                       {"validation_fraction", s.bc.validation_fraction},
                                       {"margin", s.bc.margin},
                                       {"use_theta_lr", s.bc.use_theta_lr}};
    j["replay"] = ordered_json{{"batch_size", c.problem.replay.batch_size},
                               {"capacity", c.problem.replay.capacity},
                               {"warmup", c.problem.replay.warmup}};
    j["random_search"] = ordered_json{{"radius", s.random_search_radius}};
    j["seeds"] = c.seeds;
    return j.dump(2) + "\n";
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write config file '" + path.string() + "'");
    out << dump_config(config);
    if (!out) throw IoError("failed writing config file '" + path.string() + "'");
}

std::uint64_t config_hash(const ExperimentConfig& config) { return fnv1a64(dump_config(config)); }

}  // namespace metatune
