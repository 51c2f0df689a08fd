#include "metatune/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "metatune/errors.hpp"

namespace metatune {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move '" + tmp.string() + "' into place");
    }
}

fs::path resolve_output_root(const std::optional<fs::path>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("METATUNE_OUT"); env != nullptr && *env != '\0') return fs::path(env);
    return fs::path("results");
}

fs::path execution_dir(const fs::path& root, const std::string& name, OptimizerKind kind, std::uint64_t seed) {
    return root / name / to_string(kind) / ("seed" + std::to_string(seed));
}

std::string records_csv(const HyperparamSpace& space, const std::vector<MetaEpisodeRecord>& records) {
    std::string s = "meta_episode";
    for (const auto& d : space.dims()) s += "," + d.name;
    s += ",y,best_so_far,is_new_max,train_steps,rollout_steps,wallclock_ms\n";
    for (const auto& r : records) {
        s += std::to_string(r.index);
        for (const double v : r.theta.values) s += "," + format_number(v);
        s += "," + format_number(r.y);
        s += "," + format_number(r.best_so_far);
        s += r.is_new_max ? ",1" : ",0";
        s += "," + std::to_string(r.train_steps);
        s += "," + std::to_string(r.rollout_steps);
        s += "," + format_number(r.wallclock_ms);
        s += "\n";
    }
    return s;
}

namespace {

std::string hex(std::uint64_t v) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

void probe_writable(const fs::path& dir) {
    ensure_dir(dir);
    const auto probe = dir / ".metatune-probe";
    {
        std::ofstream out(probe, std::ios::binary);
        if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
        out << "ok";
        if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
    }
    std::error_code ec;
    fs::remove(probe, ec);
}

ordered_json theta_json(const HyperparamSpace& space, const ThetaVector& theta) {
    ordered_json j = ordered_json::object();
    for (std::size_t i = 0; i < space.dim() && i < theta.values.size(); ++i) j[space[i].name] = theta.values[i];
    return j;
}

std::string summary_json(const ExperimentConfig& config, const ExecutionRecord& e) {
    ordered_json j;
    j["name"] = config.name;
    j["config_hash"] = hex(e.config_hash);
    j["optimizer"] = to_string(e.optimizer);
    j["seed"] = e.seed;
    j["meta_episodes"] = e.records.size();
    j["best_y"] = e.best_y;
    j["best_theta"] = theta_json(config.problem.space, e.best_theta);
    ordered_json pinned = ordered_json::object();
    for (const auto& [k, v] : config.problem.pinned) pinned[k] = v;
    j["pinned"] = pinned;
    j["diverged"] = static_cast<std::size_t>(
        std::count_if(e.records.begin(), e.records.end(), [](const MetaEpisodeRecord& r) { return r.diverged; }));
    j["totals"] = ordered_json{{"train_steps", e.total_train_steps},
                               {"rollout_steps", e.total_rollout_steps},
                               {"wallclock_ms", e.total_wallclock_ms}};
    return j.dump(2) + "\n";
}

// One entry per meta-episode, in the order the GP saw them.
std::string dataset_json(const OptimizationResult& r) {
    ordered_json j = ordered_json::array();
    for (std::size_t i = 0; i < r.records.size() && i < r.dataset.size(); ++i) {
        j.push_back(ordered_json{{"theta_native", r.records[i].theta.values},
                                 {"theta_normalized", r.dataset.points[i]},
                                 {"y", r.dataset.outputs[i]},
                                 {"meta_episode", r.records[i].index}});
    }
    return j.dump(2) + "\n";
}

struct Task {
    OptimizerKind kind;
    std::uint64_t seed;
};

ExecutionRecord run_one(const ExperimentConfig& config, const Task& task, const fs::path& root, bool record_timing,
                        std::uint64_t hash) {
    const auto result = run_optimizer(task.kind, config.problem, config.settings, task.seed, record_timing);
    ExecutionRecord e;
    e.config_hash = hash;
    e.optimizer = task.kind;
    e.seed = task.seed;
    e.records = result.records;
    e.best_theta = result.best_theta;
    e.best_y = result.best_y;
    for (const auto& r : result.records) {
        e.total_train_steps += r.train_steps;
        e.total_rollout_steps += r.rollout_steps;
        e.total_wallclock_ms += r.wallclock_ms;
    }
    e.dir = execution_dir(root, config.name, task.kind, task.seed);
    ensure_dir(e.dir);

    write_file_atomic(e.dir / "records.csv", records_csv(config.problem.space, e.records));
    write_file_atomic(e.dir / "dataset.json", dataset_json(result));
    std::ostringstream demos;
    write_demos_jsonl(demos, result.psi);
    write_file_atomic(e.dir / "demos.jsonl", demos.str());
    // summary.json goes last: its presence marks a complete execution.
    write_file_atomic(e.dir / "summary.json", summary_json(config, e));
    return e;
}

}  // namespace

std::vector<ExecutionRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    validate(config);
    const fs::path root = resolve_output_root(options.out_root);
    const fs::path exp_dir = root / config.name;
    probe_writable(exp_dir);
    write_file_atomic(exp_dir / "config.json", dump_config(config));

    const auto hash = config_hash(config);
    std::vector<Task> tasks;
    for (const auto kind : config.optimizers)
        for (const auto seed : config.seeds) tasks.push_back({kind, seed + options.seed_offset});

    std::vector<ExecutionRecord> out(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                out[i] = run_one(config, tasks[i], root, options.record_timing, hash);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto jobs = static_cast<std::size_t>(std::clamp<int>(options.jobs, 1, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---- report ----

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string s = "optimizer,meta_episode,mean_best,ci_low,ci_high,mean_reward\n";
    for (const auto& r : rows) {
        s += r.optimizer + "," + std::to_string(r.meta_episode) + "," + format_number(r.mean_best) + "," +
             format_number(r.mean_best - r.best_ci_half_width) + "," +
             format_number(r.mean_best + r.best_ci_half_width) + "," + format_number(r.mean_reward) + "\n";
    }
    return s;
}

std::string comparison_long_csv(const std::vector<ComparisonRow>& rows) {
    std::string s = "optimizer,meta_episode,series,mean,ci_low,ci_high,executions\n";
    auto line = [&](const ComparisonRow& r, const char* series, double mean, double hw) {
        s += r.optimizer + "," + std::to_string(r.meta_episode) + "," + series + "," + format_number(mean) + "," +
             format_number(mean - hw) + "," + format_number(mean + hw) + "," + std::to_string(r.executions) + "\n";
    };
    for (const auto& r : rows) {
        line(r, "best_so_far", r.mean_best, r.best_ci_half_width);
        line(r, "reward", r.mean_reward, r.reward_ci_half_width);
    }
    return s;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("bad number '" + s + "'");
    return v;
}

struct LoadedExecution {
    std::string optimizer;
    std::vector<double> ys;
};

// Throws IoError describing why the execution is unusable.
LoadedExecution load_execution(const fs::path& dir) {
    if (!fs::exists(dir / "summary.json")) throw IoError("no summary.json (partial execution)");
    if (!fs::exists(dir / "records.csv")) throw IoError("no records.csv");
    json summary;
    try {
        std::ifstream in(dir / "summary.json");
        summary = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(std::string("unreadable summary.json: ") + e.what());
    }
    LoadedExecution ex;
    std::size_t expected = 0;
    try {
        ex.optimizer = summary.at("optimizer").get<std::string>();
        expected = summary.at("meta_episodes").get<std::size_t>();
    } catch (const json::exception&) {
        throw IoError("summary.json lacks optimizer or meta_episodes");
    }
    std::ifstream in(dir / "records.csv");
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty records.csv");
    const auto header = split_csv_line(line);
    const auto it = std::find(header.begin(), header.end(), "y");
    if (it == header.end()) throw IoError("records.csv has no y column");
    const auto col = static_cast<std::size_t>(it - header.begin());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw IoError("records.csv has a malformed row");
        ex.ys.push_back(parse_double(cells[col]));
    }
    if (ex.ys.size() != expected)
        throw IoError("records.csv has " + std::to_string(ex.ys.size()) + " rows, summary says " +
                      std::to_string(expected));
    return ex;
}

bool looks_like_execution(const fs::path& dir) {
    return fs::exists(dir / "records.csv") || fs::exists(dir / "summary.json");
}

}  // namespace

ReportResult report(const std::vector<fs::path>& dirs, const fs::path& out_dir) {
    ReportResult result;
    std::vector<fs::path> candidates;
    for (const auto& d : dirs) {
        if (!fs::is_directory(d)) {
            result.warnings.push_back(d.string() + ": missing directory");
            continue;
        }
        if (looks_like_execution(d)) candidates.push_back(d);
        for (const auto& entry : fs::recursive_directory_iterator(d))
            if (entry.is_directory() && looks_like_execution(entry.path())) candidates.push_back(entry.path());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::map<std::string, std::vector<std::pair<fs::path, std::vector<double>>>> by_optimizer;
    for (const auto& c : candidates) {
        try {
            auto ex = load_execution(c);
            by_optimizer[ex.optimizer].emplace_back(c, std::move(ex.ys));
        } catch (const IoError& e) {
            result.warnings.push_back(c.string() + ": " + e.what());
        }
    }

    std::vector<std::pair<std::string, ExecutionScores>> scores;
    for (auto& [name, runs] : by_optimizer) {
        // Executions must share a length; keep the most common one.
        std::map<std::size_t, std::size_t> counts;
        for (const auto& r : runs) ++counts[r.second.size()];
        const auto common = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
                                return a.second < b.second;
                            })->first;
        ExecutionScores kept;
        for (auto& [path, ys] : runs) {
            if (ys.size() != common) {
                result.warnings.push_back(path.string() + ": " + std::to_string(ys.size()) +
                                          " meta-episodes, others have " + std::to_string(common));
                continue;
            }
            kept.push_back(std::move(ys));
        }
        result.executions_used += kept.size();
        scores.emplace_back(name, std::move(kept));
    }
    if (result.executions_used == 0) throw IoError("no complete executions found");

    result.rows = aggregate_executions(scores);
    ensure_dir(out_dir);
    result.comparison_csv = out_dir / "comparison.csv";
    result.long_csv = out_dir / "comparison_long.csv";
    write_file_atomic(result.comparison_csv, comparison_csv(result.rows));
    write_file_atomic(result.long_csv, comparison_long_csv(result.rows));
    return result;
}

}  // namespace metatune
