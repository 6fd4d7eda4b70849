// Command-line front end: training, baseline tuning, evaluation, RGA
// analysis, scenario emission, and SVG figure generation.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cirl/cirl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;
constexpr const char* kVersion = "cirl 1.0.0";

struct SeedRange {
    std::vector<std::uint64_t> seeds{0};
};

// "a..b" (inclusive) or a single integer.
SeedRange parse_seeds(const std::string& text) {
    SeedRange r;
    r.seeds.clear();
    const auto pos = text.find("..");
    try {
        if (pos == std::string::npos) {
            r.seeds.push_back(std::stoull(text));
        } else {
            const auto a = std::stoull(text.substr(0, pos));
            const auto b = std::stoull(text.substr(pos + 2));
            if (b < a) throw cirl::DataError("seed range end before start: " + text);
            for (auto s = a; s <= b; ++s) r.seeds.push_back(s);
        }
    } catch (const std::invalid_argument&) {
        throw cirl::DataError("bad seed spec: " + text);
    }
    if (r.seeds.empty()) throw cirl::DataError("empty seed list");
    return r;
}

std::vector<cirl::Scenario> load_scenario_set(const std::string& spec) {
    if (fs::exists(spec)) {
        const auto j = json::parse(cirl::read_file(spec), nullptr, true);
        if (j.is_array()) {
            std::vector<cirl::Scenario> set;
            for (const auto& e : j) set.push_back(cirl::scenario_from_json(e));
            return set;
        }
        return {cirl::scenario_from_json(j)};
    }
    return cirl::scenario_set_by_id(spec);
}

std::string default_out_root() {
    if (const char* env = std::getenv("CIRL_OUT_DIR")) return env;
    return "runs";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string hash_hex(const std::string& s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
    return buf;
}

cirl::SwarmConfig swarm_from_config(const json& cfg) {
    cirl::SwarmConfig sw;
    if (cfg.contains("swarm")) {
        const auto& s = cfg["swarm"];
        sw.w = s.value("w", sw.w);
        sw.c1 = s.value("c1", sw.c1);
        sw.c2 = s.value("c2", sw.c2);
        sw.n_init = s.value("n_init", sw.n_init);
        sw.n_particles = s.value("n_particles", sw.n_particles);
        sw.n_iters = s.value("n_iters", sw.n_iters);
        sw.n_episodes = s.value("n_episodes", sw.n_episodes);
        sw.n_steps = s.value("n_steps", sw.n_steps);
        sw.per_dimension_r = s.value("per_dimension_r", sw.per_dimension_r);
    }
    sw.n_threads = cfg.value("threads", static_cast<int>(std::thread::hardware_concurrency()));
    return sw;
}

void apply_overrides(std::vector<cirl::Scenario>& set, const json& cfg) {
    if (cfg.contains("noise")) {
        cirl::NoiseConfig n;
        n.c_b = cfg["noise"].value("c_b", 0.0);
        n.temp = cfg["noise"].value("temp", 0.0);
        n.vol = cfg["noise"].value("vol", 0.0);
        for (auto& s : set) s.noise = n;
    }
    if (cfg.contains("weights")) {
        cirl::RewardWeights w;
        w.q = cfg["weights"].value("q", w.q);
        w.r = cfg["weights"].value("r", w.r);
        for (auto& s : set) s.weights = w;
    }
}

struct CommonOpts {
    std::string scenario = "training";
    std::string seeds = "0";
    std::string out;
    std::string config_path;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    return json::parse(cirl::read_file(path));
}

void write_manifest(const fs::path& dir, const json& config, const json& summary,
                    const std::vector<std::string>& paths) {
    json m;
    m["config_hash"] = hash_hex(config.dump());
    m["version"] = kVersion;
    m["config"] = config;
    m["paths"] = paths;
    m["summary"] = summary;
    cirl::write_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

int cmd_train(const CommonOpts& opts, const std::string& agent) {
    const auto cfg = load_config(opts.config_path);
    auto set = load_scenario_set(opts.scenario);
    apply_overrides(set, cfg);
    const auto kind = cirl::policy_kind_from_string(agent);
    auto sw = swarm_from_config(cfg);
    const auto seeds = parse_seeds(opts.seeds).seeds;
    const fs::path dir = opts.out.empty() ? fs::path(default_out_root()) / "train" : fs::path(opts.out);
    fs::create_directories(dir);

    std::vector<std::string> paths;
    json per_seed = json::array();
    const int dim = (kind == cirl::PolicyKind::cirl ? cirl::MlpLayout::cirl()
                                                    : cirl::MlpLayout::pure_rl())
                        .param_count();
    std::cout << "training " << agent << " on '" << opts.scenario << "' (" << dim
              << " parameters)\n";
    for (const auto seed : seeds) {
        auto cfg_seed = sw;
        cfg_seed.seed = seed;
        const auto obj = cirl::make_policy_objective(kind, set, cfg_seed.n_episodes, seed);
        const auto res = cirl::pso_optimize(cfg_seed, dim, obj);
        const auto policy = cirl::PolicyParams::from_vector(kind, res.best);

        const std::string stem = "policy_" + agent + "_seed" + std::to_string(seed);
        const auto policy_path = dir / (stem + ".json");
        cirl::write_file(policy_path.string(),
                         cirl::policy_to_json(policy, {seed, opts.scenario}).dump(2) + "\n");
        const auto curve_path = dir / ("curve_" + agent + "_seed" + std::to_string(seed) + ".csv");
        cirl::write_file(curve_path.string(), cirl::learning_curve_csv(res.history));
        paths.push_back(policy_path.string());
        paths.push_back(curve_path.string());
        per_seed.push_back({{"seed", seed}, {"fitness", res.best_fitness}});
        std::cout << "  seed " << seed << ": best fitness " << cirl::fmt_num(res.best_fitness)
                  << " (" << res.evaluations << " evaluations)\n";
    }
    write_manifest(dir, cfg, {{"per_seed", per_seed}}, paths);
    return 0;
}

int cmd_tune_pid(const CommonOpts& opts) {
    const auto cfg = load_config(opts.config_path);
    auto set = load_scenario_set(opts.scenario);
    apply_overrides(set, cfg);
    cirl::DeConfig de;
    if (cfg.contains("de")) {
        de.pop = cfg["de"].value("pop", de.pop);
        de.f = cfg["de"].value("f", de.f);
        de.cr = cfg["de"].value("cr", de.cr);
        de.generations = cfg["de"].value("generations", de.generations);
        de.seed = cfg["de"].value("seed", de.seed);
    }
    de.n_threads = cfg.value("threads", static_cast<int>(std::thread::hardware_concurrency()));
    const fs::path dir = opts.out.empty() ? fs::path(default_out_root()) / "tune-pid" : fs::path(opts.out);
    fs::create_directories(dir);

    const auto res = cirl::de_tune_static_pid(set, de);
    cirl::write_file((dir / "gains.json").string(), cirl::gains_to_json(res.gains).dump(2) + "\n");
    cirl::write_file((dir / "reference_gains.json").string(),
                     cirl::gains_to_json(cirl::reference_static_gains()).dump(2) + "\n");
    cirl::write_file((dir / "tune_curve.csv").string(), cirl::learning_curve_csv(res.history));

    const double ref_fit = cirl::evaluate(
        cirl::make_static_pid_controller(cirl::reference_static_gains()), set, 3, 0);
    std::cout << "tuned gains fitness:     " << cirl::fmt_num(res.fitness) << "\n"
              << "reference gains fitness: " << cirl::fmt_num(ref_fit) << "\n";
    write_manifest(dir, cfg, {{"tuned_fitness", res.fitness}, {"reference_fitness", ref_fit}},
                   {(dir / "gains.json").string(), (dir / "reference_gains.json").string()});
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& policy_path,
                 const std::string& gains_path) {
    const auto cfg = load_config(opts.config_path);
    auto set = load_scenario_set(opts.scenario);
    apply_overrides(set, cfg);
    if (set.size() != 1)
        throw cirl::DataError("evaluate expects a single scenario, got a set of " +
                              std::to_string(set.size()));
    const auto& scenario = set.front();

    cirl::Controller ctl;
    std::string label;
    if (!policy_path.empty()) {
        const auto policy = cirl::policy_from_json(json::parse(cirl::read_file(policy_path)));
        label = cirl::to_string(policy.kind);
        ctl = cirl::make_policy_controller(policy);
    } else if (!gains_path.empty()) {
        const auto gains = cirl::gains_from_json(json::parse(cirl::read_file(gains_path)));
        label = "static_pid";
        ctl = cirl::make_static_pid_controller(gains);
    } else {
        throw cirl::DataError("evaluate needs --policy or --gains");
    }

    const auto seeds = parse_seeds(opts.seeds).seeds;
    const fs::path dir = opts.out.empty() ? fs::path(default_out_root()) / "evaluate" : fs::path(opts.out);
    fs::create_directories(dir);

    std::vector<std::string> paths;
    std::vector<double> rewards;
    for (const auto seed : seeds) {
        const auto trace = cirl::run_episode(ctl, scenario, seed);
        rewards.push_back(trace.total_reward);
        const auto traj = dir / ("traj_" + label + "_seed" + std::to_string(seed) + ".csv");
        cirl::write_file(traj.string(), cirl::trajectory_csv(trace));
        paths.push_back(traj.string());
        if (!trace.steps.empty() && trace.steps.front().has_gains) {
            const auto gcsv = dir / ("gains_" + label + "_seed" + std::to_string(seed) + ".csv");
            cirl::write_file(gcsv.string(), cirl::gain_trajectory_csv(trace));
            paths.push_back(gcsv.string());
        }
    }
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= rewards.size();
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double stddev = rewards.size() > 1 ? std::sqrt(var / (rewards.size() - 1)) : 0.0;

    json summary = {{"controller", label},
                    {"scenario", scenario.id},
                    {"mean", mean},
                    {"std", stddev},
                    {"per_seed", rewards}};
    cirl::write_file((dir / ("summary_" + label + ".json")).string(), summary.dump(2) + "\n");
    paths.push_back((dir / ("summary_" + label + ".json")).string());
    std::cout << label << " on " << scenario.id << ": mean reward " << cirl::fmt_num(mean)
              << " (std " << cirl::fmt_num(stddev) << ") over " << rewards.size() << " seeds\n";
    write_manifest(dir, cfg, summary, paths);
    return 0;
}

int cmd_rga(bool zero_noise) {
    cirl::GainExperiment ex;
    if (!zero_noise) ex.noise = cirl::default_noise();
    const auto k = cirl::steady_state_gain_matrix(ex);
    const auto lam = cirl::rga(k);
    std::cout << "open-loop gain matrix K (outputs [C_B, V] x inputs [F_in, T_c]):\n";
    for (const auto& row : k)
        std::cout << "  [" << cirl::fmt_num(row[0]) << ", " << cirl::fmt_num(row[1]) << "]\n";
    std::cout << "relative gain array:\n";
    for (const auto& row : lam)
        std::cout << "  [" << cirl::fmt_num(row[0]) << ", " << cirl::fmt_num(row[1]) << "]\n";
    std::cout << "row sums: " << cirl::fmt_num(lam[0][0] + lam[0][1]) << ", "
              << cirl::fmt_num(lam[1][0] + lam[1][1]) << "\n";
    const bool off_diag = lam[0][1] > lam[0][0];
    std::cout << "pairing: " << (off_diag ? "(C_B <-> T_c), (V <-> F_in)"
                                          : "(C_B <-> F_in), (V <-> T_c)")
              << "\n";
    return 0;
}

int cmd_scenario_emit(const std::string& id, const std::string& out) {
    const auto set = cirl::scenario_set_by_id(id);
    const fs::path dir = out.empty() ? fs::path(default_out_root()) / "scenarios" : fs::path(out);
    fs::create_directories(dir);
    json arr = json::array();
    for (const auto& s : set) arr.push_back(cirl::to_json(s));
    const auto path = dir / (id + ".json");
    cirl::write_file(path.string(), arr.dump(2) + "\n");
    std::cout << "wrote " << path.string() << " (" << set.size() << " scenario(s))\n";
    return 0;
}

int cmd_plot(const std::string& kind, const std::vector<std::string>& inputs,
             const std::string& out) {
    std::vector<std::pair<std::string, cirl::CsvTable>> runs;
    for (const auto& path : inputs)
        runs.emplace_back(fs::path(path).stem().string(), cirl::parse_csv(cirl::read_file(path)));
    std::string svg;
    if (kind == "trajectory")
        svg = cirl::plot_trajectories(runs);
    else if (kind == "gains")
        svg = cirl::plot_gains(runs);
    else if (kind == "curves")
        svg = cirl::plot_learning_curves(runs);
    else
        throw cirl::DataError("unknown plot kind: " + kind);
    cirl::write_file(out, svg);
    std::cout << "wrote " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control-informed RL laboratory for a CSTR benchmark"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string agent = "cirl";
    std::string policy_path, gains_path;
    bool zero_noise = false;
    std::string scenario_id = "training";
    std::string plot_kind = "trajectory";
    std::vector<std::string> plot_inputs;
    std::string plot_out = "plot.svg";

    auto* train = app.add_subcommand("train", "train a policy with random search + PSO");
    train->add_option("--agent", agent, "cirl or rl")->check(CLI::IsMember({"cirl", "rl"}));
    train->add_option("--scenario", opts.scenario, "scenario set id or file");
    train->add_option("--seeds", opts.seeds, "seed or range a..b");
    train->add_option("--config", opts.config_path, "config JSON");
    train->add_option("--out", opts.out, "output directory");

    auto* tune = app.add_subcommand("tune-pid", "tune the static PID baseline with DE");
    tune->add_option("--scenario", opts.scenario);
    tune->add_option("--config", opts.config_path);
    tune->add_option("--out", opts.out);

    auto* eval = app.add_subcommand("evaluate", "roll out a policy or static gains");
    eval->add_option("--policy", policy_path, "policy JSON file");
    eval->add_option("--gains", gains_path, "static gain JSON file");
    eval->add_option("--scenario", opts.scenario);
    eval->add_option("--seeds", opts.seeds);
    eval->add_option("--config", opts.config_path);
    eval->add_option("--out", opts.out);

    auto* rga_cmd = app.add_subcommand("rga", "open-loop gain matrix and RGA pairing");
    rga_cmd->add_flag("--zero-noise", zero_noise, "disable measurement noise");

    auto* scenario = app.add_subcommand("scenario", "scenario file operations");
    auto* emit = scenario->add_subcommand("emit", "write builder scenarios as JSON");
    emit->add_option("id", scenario_id, "scenario set id")->required();
    emit->add_option("--out", opts.out);

    auto* plot = app.add_subcommand("plot", "render CSV outputs as SVG figures");
    plot->add_option("kind", plot_kind, "trajectory | gains | curves")->required();
    plot->add_option("inputs", plot_inputs, "input CSV files")->required();
    plot->add_option("--out", plot_out, "output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(opts, agent);
        if (tune->parsed()) return cmd_tune_pid(opts);
        if (eval->parsed()) return cmd_evaluate(opts, policy_path, gains_path);
        if (rga_cmd->parsed()) return cmd_rga(zero_noise);
        if (scenario->parsed()) return cmd_scenario_emit(scenario_id, opts.out);
        if (plot->parsed()) return cmd_plot(plot_kind, plot_inputs, plot_out);
    } catch (const cirl::DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const cirl::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
