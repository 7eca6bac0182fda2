// gms_cli: simulate the batch birth/death evolution model, classify its
// regime, study the auxiliary walks and analyze trajectory files.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime error,
// 3 validation failure.

#include "gms/gms.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitValidation = 3;

// Flags shared by simulate, ensemble and sweep.
struct ModelFlags {
    double p = 0.5;
    std::string birth = "const:1";
    std::string death = "const:1";
    std::uint64_t steps = 0;
    std::uint64_t seed = 1;
    double eps = 0.05;
    std::string checkpoints = "geom";
    std::optional<std::uint64_t> bound_M;
    std::uint64_t lazy_threshold = gms::kThinDirectLimit;
    std::uint64_t snapshot_limit = std::uint64_t{1} << 22;
    std::string out;
    std::string format = "csv";
};

void add_law_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--p", f.p, "birth probability in (0,1)")->required();
    cmd->add_option("--birth", f.birth, "law of Z: const:k unif:a:b geom:r pois1:lambda zeta:s")->required();
    cmd->add_option("--death", f.death, "law of X (same syntax)")->required();
}

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    add_law_flags(cmd, f);
    cmd->add_option("--steps", f.steps, "horizon in steps")->required();
    cmd->add_option("--seed", f.seed, "64-bit seed");
    cmd->add_option("--eps", f.eps, "epsilon for A^eps tracking");
    cmd->add_option("--checkpoints", f.checkpoints, "'geom' or comma-separated step list");
    cmd->add_option("--M", f.bound_M, "bound on X (defaults to the law's supremum when bounded)");
    cmd->add_option("--lazy-threshold", f.lazy_threshold, "store birth batches at least this large as blocks");
    cmd->add_option("--snapshot-limit", f.snapshot_limit, "subsample final populations above this size");
    cmd->add_option("--out", f.out, "output directory")->required();
    cmd->add_option("--format", f.format, "csv or record")->check(CLI::IsMember({"csv", "record"}));
}

std::vector<std::uint64_t> parse_checkpoints(const std::string& text) {
    if (text == "geom" || text.empty()) return {};
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw gms::ParseError(tok, "checkpoint must be a positive integer");
        }
    }
    return out;
}

gms::ModelConfig to_config(const ModelFlags& f) {
    gms::ModelConfig cfg;
    cfg.p = f.p;
    cfg.law_z = gms::parse_law(f.birth);
    cfg.law_x = gms::parse_law(f.death);
    cfg.horizon = f.steps;
    cfg.seed = f.seed;
    cfg.eps_track = f.eps;
    cfg.checkpoints = parse_checkpoints(f.checkpoints);
    cfg.bound_M = f.bound_M;
    cfg.lazy_threshold = f.lazy_threshold;
    cfg.snapshot_limit = f.snapshot_limit;
    return cfg;
}

gms::io::Format to_format(const std::string& s) {
    return s == "record" ? gms::io::Format::Record : gms::io::Format::Csv;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json manifest(const gms::ResolvedConfig& rc, const std::string& command, const std::string& format,
                      std::uint64_t replication, const std::vector<std::string>& outputs,
                      const gms::Trajectory& traj) {
    ordered_json j;
    j["artifact_version"] = gms::io::kVersion;
    j["timestamp"] = utc_timestamp();
    j["command"] = command;
    j["format"] = format;
    j["replication"] = replication;
    j["config"] = gms::io::config_to_json(rc.config);
    j["regime"] = gms::io::regime_to_json(rc.regime);
    j["outputs"] = outputs;
    j["trajectory"] = gms::io::trajectory_meta(traj);
    return j;
}

void write_replication(const fs::path& dir, const gms::ResolvedConfig& rc, const std::string& command,
                       const std::string& format, std::uint64_t replication, const gms::Trajectory& traj) {
    auto outputs = gms::io::write_trajectory_files(dir, traj, to_format(format));
    outputs.push_back("manifest.json");
    gms::io::write_text_file(dir / "manifest.json",
                             manifest(rc, command, format, replication, outputs, traj).dump(2) + "\n");
}

std::string rep_dir_name(std::uint64_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep_%04llu", static_cast<unsigned long long>(i));
    return buf;
}

void run_ensemble_to(const fs::path& out, const gms::ModelConfig& cfg, std::uint64_t reps, unsigned threads,
                     const std::string& format, const std::string& command) {
    const gms::ResolvedConfig rc = gms::resolve(cfg);
    const auto trajectories = gms::run_ensemble(cfg, reps, threads);
    fs::create_directories(out);
    ordered_json top;
    top["artifact_version"] = gms::io::kVersion;
    top["timestamp"] = utc_timestamp();
    top["command"] = command;
    top["replications"] = reps;
    top["format"] = format;
    top["config"] = gms::io::config_to_json(rc.config);
    top["regime"] = gms::io::regime_to_json(rc.regime);
    std::vector<std::string> dirs;
    for (std::uint64_t i = 0; i < reps; ++i) {
        dirs.push_back(rep_dir_name(i));
        write_replication(out / dirs.back(), rc, command, format, i, trajectories[i]);
    }
    top["outputs"] = dirs;
    gms::io::write_text_file(out / "manifest.json", top.dump(2) + "\n");
}

// Replication directories under `in`: `in` itself when it holds a single
// trajectory, else its rep_* children in name order.
std::vector<fs::path> trajectory_dirs(const fs::path& in) {
    if (fs::exists(in / "manifest.json")) {
        const auto j = nlohmann::json::parse(gms::io::read_text_file(in / "manifest.json"));
        if (j.contains("trajectory")) return {in};
    }
    std::vector<fs::path> out;
    if (!fs::is_directory(in)) throw gms::Error("not a directory: " + in.string());
    for (const auto& e : fs::directory_iterator(in))
        if (e.is_directory() && e.path().filename().string().rfind("rep_", 0) == 0 &&
            fs::exists(e.path() / "manifest.json"))
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw gms::Error("no trajectories under " + in.string());
    return out;
}

std::string opt_real(const std::optional<double>& v) { return v ? gms::io::real17(*v) : std::string(); }
template <typename T>
std::string opt_int(const std::optional<T>& v) {
    return v ? std::to_string(*v) : std::string();
}

struct SummaryRow {
    std::string rep;
    std::optional<double> ks_stat, ks_pvalue, gap_exponent, sym_diff_final;
    std::optional<double> extinctions, a_eps_count, a_eps_last;
};

std::string analyze_dir(const fs::path& in, std::uint64_t n_min) {
    std::vector<SummaryRow> rows;
    for (const auto& dir : trajectory_dirs(in)) {
        const auto traj = gms::io::read_trajectory_dir(dir);
        SummaryRow row;
        row.rep = dir == in ? "0" : dir.filename().string().substr(4);
        if (!traj.final_snapshot.empty()) {
            const double lo = traj.frontier_defined ? traj.f : 0.0;
            const auto ks = gms::ks_against_uniform(traj.final_snapshot, lo, 1.0);
            row.ks_stat = ks.statistic;
            row.ks_pvalue = ks.p_value;
        }
        try {
            row.gap_exponent = gms::gap_exponent(traj, n_min).exponent;
        } catch (const gms::TooFewCheckpoints&) {
        }
        const auto ratios = gms::sym_diff_ratio(traj);
        if (!ratios.empty()) row.sym_diff_final = ratios.back().ratio;
        row.extinctions = static_cast<double>(traj.extinction_times.size());
        if (traj.frontier_defined) {
            const auto a = gms::a_eps_summary(traj);
            row.a_eps_count = static_cast<double>(a.count);
            if (a.last) row.a_eps_last = static_cast<double>(*a.last);
        }
        rows.push_back(row);
    }
    auto med = [&](std::optional<double> SummaryRow::*field) -> std::optional<double> {
        std::vector<double> v;
        for (const auto& r : rows)
            if (r.*field) v.push_back(*(r.*field));
        if (v.empty()) return std::nullopt;
        return gms::median(v);
    };
    SummaryRow agg;
    agg.rep = "median";
    agg.ks_stat = med(&SummaryRow::ks_stat);
    agg.ks_pvalue = med(&SummaryRow::ks_pvalue);
    agg.gap_exponent = med(&SummaryRow::gap_exponent);
    agg.sym_diff_final = med(&SummaryRow::sym_diff_final);
    agg.extinctions = med(&SummaryRow::extinctions);
    agg.a_eps_count = med(&SummaryRow::a_eps_count);
    agg.a_eps_last = med(&SummaryRow::a_eps_last);
    rows.push_back(agg);

    std::ostringstream os;
    os << "rep,ks_stat,ks_pvalue,gap_exponent,sym_diff_final,extinctions,a_eps_count,a_eps_last\n";
    for (const auto& r : rows) {
        os << r.rep << ',' << opt_real(r.ks_stat) << ',' << opt_real(r.ks_pvalue) << ','
           << opt_real(r.gap_exponent) << ',' << opt_real(r.sym_diff_final) << ',' << opt_real(r.extinctions)
           << ',' << opt_real(r.a_eps_count) << ',' << opt_real(r.a_eps_last) << '\n';
    }
    return os.str();
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() != 3) throw gms::ParseError(text, "expected lo:hi:step");
    double lo = 0, hi = 0, step = 0;
    try {
        lo = std::stod(parts[0]);
        hi = std::stod(parts[1]);
        step = std::stod(parts[2]);
    } catch (const std::exception&) {
        throw gms::ParseError(text, "grid bounds must be numbers");
    }
    if (!(step > 0.0) || hi < lo) throw gms::ParseError(text, "need lo <= hi and step > 0");
    std::vector<double> grid;
    for (std::uint64_t i = 0;; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        if (v > hi + 1e-9 * step) break;
        grid.push_back(v);
    }
    return grid;
}

// Flag values recorded in a manifest written by simulate or ensemble.
std::map<std::string, std::string> read_manifest_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(gms::io::read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw gms::ParseError(path, e.what());
    } catch (const gms::Error& e) {
        throw gms::ConfigError(e.what());
    }
    if (!j.contains("config")) throw gms::ParseError(path, "manifest has no config object");
    const auto& c = j["config"];
    std::map<std::string, std::string> out;
    auto real = [&](const char* key) { return gms::io::real17(c.at(key).get<double>()); };
    out["p"] = real("p");
    out["birth"] = c.at("birth").get<std::string>();
    out["death"] = c.at("death").get<std::string>();
    out["steps"] = std::to_string(c.at("steps").get<std::uint64_t>());
    out["seed"] = std::to_string(c.at("seed").get<std::uint64_t>());
    out["eps"] = real("eps");
    std::string cps;
    for (const auto& v : c.at("checkpoints")) cps += (cps.empty() ? "" : ",") + std::to_string(v.get<std::uint64_t>());
    if (!cps.empty()) out["checkpoints"] = cps;
    if (!c.at("bound_M").is_null()) out["M"] = std::to_string(c.at("bound_M").get<std::uint64_t>());
    out["lazy-threshold"] = std::to_string(c.at("lazy_threshold").get<std::uint64_t>());
    out["snapshot-limit"] = std::to_string(c.at("snapshot_limit").get<std::uint64_t>());
    if (j.contains("replications")) out["reps"] = std::to_string(j["replications"].get<std::uint64_t>());
    if (j.contains("format")) out["format"] = j["format"].get<std::string>();
    return out;
}

// Reads `key = value` lines; '#' starts a comment. A .json file is taken
// to be a run manifest.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    if (fs::path(path).extension() == ".json") return read_manifest_config(path);
    std::ifstream is(path);
    if (!is) throw gms::ConfigError("cannot read config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw gms::ParseError(line, "expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

// Splices `--key value` pairs from --config files into argv for every key
// not already given on the command line, so flags win on conflict.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string config_path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (config_path.empty()) return kept;
    auto given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const auto& a : kept)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : read_config_file(config_path)) {
        if (given(key)) continue;
        extra.push_back("--" + key);
        extra.push_back(value);
    }
    kept.insert(kept.end(), extra.begin(), extra.end());
    return kept;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch birth/death evolution model: simulation and verification"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    ModelFlags flags;
    std::uint64_t reps = 1;
    unsigned threads = gms::default_thread_count();
    std::string p_grid;

    auto* regime_cmd = app.add_subcommand("regime", "print p_c, f and the regime of a parameter triple");
    add_law_flags(regime_cmd, flags);

    auto* simulate_cmd = app.add_subcommand("simulate", "run one trajectory and write its files");
    add_model_flags(simulate_cmd, flags);

    auto* ensemble_cmd = app.add_subcommand("ensemble", "run independent replications");
    add_model_flags(ensemble_cmd, flags);
    ensemble_cmd->add_option("--reps", reps, "number of replications")->required();
    ensemble_cmd->add_option("--threads", threads, "worker threads (default: GMS_THREADS or all cores)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run an ensemble per birth probability on a grid");
    {
        sweep_cmd->add_option("--p-grid", p_grid, "lo:hi:step")->required();
        sweep_cmd->add_option("--birth", flags.birth, "law of Z")->required();
        sweep_cmd->add_option("--death", flags.death, "law of X")->required();
        sweep_cmd->add_option("--steps", flags.steps, "horizon in steps")->required();
        sweep_cmd->add_option("--seed", flags.seed, "64-bit seed");
        sweep_cmd->add_option("--eps", flags.eps, "epsilon for A^eps tracking");
        sweep_cmd->add_option("--checkpoints", flags.checkpoints, "'geom' or comma-separated list");
        sweep_cmd->add_option("--lazy-threshold", flags.lazy_threshold, "block storage threshold");
        sweep_cmd->add_option("--snapshot-limit", flags.snapshot_limit, "snapshot subsampling threshold");
        sweep_cmd->add_option("--out", flags.out, "output directory")->required();
        sweep_cmd->add_option("--format", flags.format, "csv or record")->check(CLI::IsMember({"csv", "record"}));
        sweep_cmd->add_option("--reps", reps, "replications per grid point");
        sweep_cmd->add_option("--threads", threads, "worker threads");
    }

    std::string walk = "thinned";
    std::uint64_t n_max = 100;
    std::uint64_t walks = 100000;
    std::optional<double> walk_f;
    std::string ladder_out;
    auto* ladder_cmd = app.add_subcommand("ladder", "Monte Carlo tail of the first passage time tau");
    add_law_flags(ladder_cmd, flags);
    ladder_cmd->add_option("--walk", walk, "thinned or total")->check(CLI::IsMember({"thinned", "total"}));
    ladder_cmd->add_option("--n-max", n_max, "largest n");
    ladder_cmd->add_option("--walks", walks, "number of walks");
    ladder_cmd->add_option("--f", walk_f, "thinning level (default: the frontier f)");
    ladder_cmd->add_option("--seed", flags.seed, "64-bit seed");
    ladder_cmd->add_option("--threads", threads, "worker threads");
    ladder_cmd->add_option("--out", ladder_out, "write CSV here instead of standard output");

    std::string analyze_in;
    std::uint64_t n_min = gms::kDefaultGapNMin;
    auto* analyze_cmd = app.add_subcommand("analyze", "summarize trajectory files");
    analyze_cmd->add_option("--in", analyze_in, "simulate/ensemble output directory")->required();
    analyze_cmd->add_option("--n-min", n_min, "smallest checkpoint used by the gap fit");

    std::uint64_t n_configs = 100;
    std::uint64_t horizon = 10000;
    auto* validate_cmd = app.add_subcommand("validate", "compare the engine with the naive oracle");
    validate_cmd->add_option("--configs", n_configs, "number of random configurations");
    validate_cmd->add_option("--horizon", horizon, "steps per configuration");
    validate_cmd->add_option("--seed", flags.seed, "64-bit seed");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const gms::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (*regime_cmd) {
            const auto report = gms::classify_regime(flags.p, gms::parse_law(flags.death), gms::parse_law(flags.birth));
            std::cout << gms::io::regime_to_text(report);
            std::cout << gms::io::regime_to_json(report).dump() << '\n';
            return kExitOk;
        }
        if (*simulate_cmd) {
            const auto rc = gms::resolve(to_config(flags));
            const auto traj = gms::run(rc, 0);
            write_replication(flags.out, rc, "simulate", flags.format, 0, traj);
            return kExitOk;
        }
        if (*ensemble_cmd) {
            run_ensemble_to(flags.out, to_config(flags), reps, threads, flags.format, "ensemble");
            return kExitOk;
        }
        if (*sweep_cmd) {
            const auto grid = parse_grid(p_grid);
            fs::create_directories(flags.out);
            for (double p : grid) {
                ModelFlags point = flags;
                point.p = p;
                char name[32];
                std::snprintf(name, sizeof name, "p_%.6f", p);
                run_ensemble_to(fs::path(flags.out) / name, to_config(point), reps, threads, flags.format, "sweep");
            }
            return kExitOk;
        }
        if (*ladder_cmd) {
            gms::WalkSpec spec;
            spec.kind = walk == "total" ? gms::WalkKind::TotalPopulation : gms::WalkKind::FrontierThinned;
            spec.p = flags.p;
            spec.law_z = gms::parse_law(flags.birth);
            spec.law_x = gms::parse_law(flags.death);
            if (spec.kind == gms::WalkKind::FrontierThinned)
                spec.f = walk_f ? *walk_f : gms::frontier_f(spec.p, spec.law_x.mean(), spec.law_z.mean());
            const auto rows = gms::tau_tail_table(spec, n_max, walks, flags.seed, threads);
            std::ostringstream os;
            os << "n,p_tau_ge_n,stderr,asymptote,ratio\n";
            for (const auto& r : rows)
                os << r.n << ',' << gms::io::real17(r.estimate) << ',' << gms::io::real17(r.std_error) << ','
                   << gms::io::real17(r.asymptote) << ',' << gms::io::real17(r.ratio) << '\n';
            if (ladder_out.empty()) std::cout << os.str();
            else gms::io::write_text_file(ladder_out, os.str());
            return kExitOk;
        }
        if (*analyze_cmd) {
            const std::string summary = analyze_dir(analyze_in, n_min);
            const fs::path in(analyze_in);
            gms::io::write_text_file(in / "summary.csv", summary);
            std::cout << summary;
            return kExitOk;
        }
        if (*validate_cmd) {
            bool all_ok = true;
            for (std::uint64_t i = 0; i < n_configs; ++i) {
                const auto cfg = gms::random_validation_config(i, horizon, flags.seed);
                const bool ok = gms::run(cfg) == gms::naive_run(cfg);
                all_ok = all_ok && ok;
                std::cout << "config " << i << ": " << (ok ? "PASS" : "FAIL") << " p=" << gms::io::real17(cfg.p)
                          << " birth=" << cfg.law_z.to_string() << " death=" << cfg.law_x.to_string()
                          << " eps=" << cfg.eps_track << " seed=" << cfg.seed << '\n';
            }
            std::cout << (all_ok ? "validate: all configurations agree\n" : "validate: MISMATCH\n");
            return all_ok ? kExitOk : kExitValidation;
        }
    } catch (const gms::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
