#pragma once

// File formats shared by the CLI, the tests and external plotting tools.
//
//   trajectory.csv    n,size,l,r,rprime,t_bad,sym_diff   (t_bad empty when untracked)
//   trajectory.jsonl  one object per checkpoint with the same fields
//   extinctions.csv   single column "n"
//   a_eps.csv         single column "n"
//   snapshot.csv      single column "fitness", sorted, 17 significant digits
//   manifest.json     resolved configuration, trajectory metadata, outputs
//
// All text is ASCII with LF line endings.

#include "gms/error.hpp"
#include "gms/process.hpp"
#include "gms/theory.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gms::io {

inline constexpr const char* kTrajectoryHeader = "n,size,l,r,rprime,t_bad,sym_diff";
inline constexpr const char* kVersion = "1.0.0";

enum class Format { Csv, Record };

inline std::string real17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << kTrajectoryHeader << '\n';
    for (const auto& c : traj.checkpoints) {
        os << c.n << ',' << c.size << ',' << c.l << ',' << c.r << ',' << c.rprime << ',';
        if (c.t_bad) os << *c.t_bad;
        os << ',' << c.sym_diff << '\n';
    }
}

inline void write_trajectory_records(std::ostream& os, const Trajectory& traj) {
    for (const auto& c : traj.checkpoints) {
        nlohmann::ordered_json j;
        j["n"] = c.n;
        j["size"] = c.size;
        j["l"] = c.l;
        j["r"] = c.r;
        j["rprime"] = c.rprime;
        j["t_bad"] = c.t_bad ? nlohmann::ordered_json(*c.t_bad) : nlohmann::ordered_json(nullptr);
        j["sym_diff"] = c.sym_diff;
        os << j.dump() << '\n';
    }
}

inline void write_times_csv(std::ostream& os, const std::vector<std::uint64_t>& times) {
    os << "n\n";
    for (auto t : times) os << t << '\n';
}

inline void write_snapshot_csv(std::ostream& os, const std::vector<double>& snapshot) {
    os << "fitness\n";
    for (double v : snapshot) os << real17(v) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::uint64_t to_u64(const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        throw ParseError(s, "expected a non-negative integer");
    }
    if (used != s.size()) throw ParseError(s, "expected a non-negative integer");
    return v;
}

inline void expect_header(std::istream& is, const std::string& header) {
    std::string line;
    if (!std::getline(is, line) || line != header) throw ParseError(line, "expected header '" + header + "'");
}

}  // namespace detail

inline std::vector<CheckpointRecord> read_trajectory_csv(std::istream& is) {
    detail::expect_header(is, kTrajectoryHeader);
    std::vector<CheckpointRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 7) throw ParseError(line, "expected 7 columns");
        CheckpointRecord c;
        c.n = detail::to_u64(cells[0]);
        c.size = detail::to_u64(cells[1]);
        c.l = detail::to_u64(cells[2]);
        c.r = detail::to_u64(cells[3]);
        c.rprime = detail::to_u64(cells[4]);
        if (!cells[5].empty()) c.t_bad = detail::to_u64(cells[5]);
        c.sym_diff = detail::to_u64(cells[6]);
        out.push_back(c);
    }
    return out;
}

inline std::vector<CheckpointRecord> read_trajectory_records(std::istream& is) {
    std::vector<CheckpointRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        CheckpointRecord c;
        c.n = j.at("n").get<std::uint64_t>();
        c.size = j.at("size").get<std::uint64_t>();
        c.l = j.at("l").get<std::uint64_t>();
        c.r = j.at("r").get<std::uint64_t>();
        c.rprime = j.at("rprime").get<std::uint64_t>();
        if (!j.at("t_bad").is_null()) c.t_bad = j.at("t_bad").get<std::uint64_t>();
        c.sym_diff = j.at("sym_diff").get<std::uint64_t>();
        out.push_back(c);
    }
    return out;
}

inline std::vector<std::uint64_t> read_times_csv(std::istream& is) {
    detail::expect_header(is, "n");
    std::vector<std::uint64_t> out;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) out.push_back(detail::to_u64(line));
    return out;
}

inline std::vector<double> read_snapshot_csv(std::istream& is) {
    detail::expect_header(is, "fitness");
    std::vector<double> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ParseError(line, "expected a real");
        }
    }
    return out;
}

inline nlohmann::ordered_json config_to_json(const ModelConfig& cfg) {
    nlohmann::ordered_json j;
    j["p"] = cfg.p;
    j["birth"] = cfg.law_z.to_string();
    j["death"] = cfg.law_x.to_string();
    j["steps"] = cfg.horizon;
    j["seed"] = cfg.seed;
    j["eps"] = cfg.eps_track;
    j["bound_M"] = cfg.bound_M ? nlohmann::ordered_json(*cfg.bound_M) : nlohmann::ordered_json(nullptr);
    j["checkpoints"] = cfg.checkpoints;
    j["lazy_threshold"] = cfg.lazy_threshold;
    j["snapshot_limit"] = cfg.snapshot_limit;
    return j;
}

inline nlohmann::ordered_json regime_to_json(const RegimeReport& r) {
    auto ext = [](double v) {
        return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json("inf");
    };
    nlohmann::ordered_json j;
    j["p"] = r.p;
    j["mean_x"] = ext(r.mean_x);
    j["mean_z"] = ext(r.mean_z);
    j["p_c"] = r.p_c ? nlohmann::ordered_json(*r.p_c) : nlohmann::ordered_json(nullptr);
    j["f"] = r.f ? nlohmann::ordered_json(*r.f) : nlohmann::ordered_json(nullptr);
    j["regime"] = regime_name(r.regime);
    j["hypotheses_used"] = r.hypotheses_used;
    j["statement"] = r.statement;
    return j;
}

inline std::string regime_to_text(const RegimeReport& r) {
    auto ext = [](double v) { return std::isfinite(v) ? real17(v) : std::string("inf"); };
    std::ostringstream os;
    auto row = [&](const std::string& key, const std::string& value) {
        os << key << std::string(key.size() < 12 ? 12 - key.size() : 1, ' ') << value << '\n';
    };
    row("p", real17(r.p));
    row("mean_x", ext(r.mean_x));
    row("mean_z", ext(r.mean_z));
    row("p_c", r.p_c ? real17(*r.p_c) : "undefined");
    row("f", r.f ? real17(*r.f) : "undefined");
    row("regime", regime_name(r.regime));
    std::string hyp;
    for (const auto& h : r.hypotheses_used) hyp += (hyp.empty() ? "" : "; ") + h;
    row("hypotheses", hyp);
    row("statement", r.statement);
    return os.str();
}

inline nlohmann::ordered_json trajectory_meta(const Trajectory& traj) {
    nlohmann::ordered_json j;
    j["frontier_defined"] = traj.frontier_defined;
    j["f"] = traj.f;
    j["eps"] = traj.eps;
    j["bound_M"] = traj.bound_M ? nlohmann::ordered_json(*traj.bound_M) : nlohmann::ordered_json(nullptr);
    j["horizon"] = traj.horizon;
    j["final_size"] = traj.final_size;
    j["snapshot_subsampled"] = traj.snapshot_subsampled;
    j["gap_invariant_ok"] = traj.gap_invariant_ok;
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << content;
    if (!os) throw Error("write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// Writes the data files of one trajectory into `dir` and returns their
// names. The manifest is written separately.
inline std::vector<std::string> write_trajectory_files(const std::filesystem::path& dir, const Trajectory& traj,
                                                       Format format) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> names;
    auto emit = [&](const std::string& name, auto&& writer) {
        std::ostringstream os;
        writer(os);
        write_text_file(dir / name, os.str());
        names.push_back(name);
    };
    if (format == Format::Csv)
        emit("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });
    else
        emit("trajectory.jsonl", [&](std::ostream& os) { write_trajectory_records(os, traj); });
    emit("extinctions.csv", [&](std::ostream& os) { write_times_csv(os, traj.extinction_times); });
    if (traj.frontier_defined)
        emit("a_eps.csv", [&](std::ostream& os) { write_times_csv(os, traj.a_eps_times); });
    emit("snapshot.csv", [&](std::ostream& os) { write_snapshot_csv(os, traj.final_snapshot); });
    return names;
}

// Reloads a trajectory written by write_trajectory_files plus its manifest.
inline Trajectory read_trajectory_dir(const std::filesystem::path& dir) {
    const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    const auto& meta = manifest.at("trajectory");
    Trajectory traj;
    traj.frontier_defined = meta.at("frontier_defined").get<bool>();
    traj.f = meta.at("f").get<double>();
    traj.eps = meta.at("eps").get<double>();
    if (!meta.at("bound_M").is_null()) traj.bound_M = meta.at("bound_M").get<std::uint64_t>();
    traj.horizon = meta.at("horizon").get<std::uint64_t>();
    traj.final_size = meta.at("final_size").get<std::uint64_t>();
    traj.snapshot_subsampled = meta.at("snapshot_subsampled").get<bool>();
    traj.gap_invariant_ok = meta.at("gap_invariant_ok").get<bool>();
    if (std::filesystem::exists(dir / "trajectory.csv")) {
        std::istringstream is(read_text_file(dir / "trajectory.csv"));
        traj.checkpoints = read_trajectory_csv(is);
    } else {
        std::istringstream is(read_text_file(dir / "trajectory.jsonl"));
        traj.checkpoints = read_trajectory_records(is);
    }
    {
        std::istringstream is(read_text_file(dir / "extinctions.csv"));
        traj.extinction_times = read_times_csv(is);
    }
    if (std::filesystem::exists(dir / "a_eps.csv")) {
        std::istringstream is(read_text_file(dir / "a_eps.csv"));
        traj.a_eps_times = read_times_csv(is);
    }
    {
        std::istringstream is(read_text_file(dir / "snapshot.csv"));
        traj.final_snapshot = read_snapshot_csv(is);
    }
    return traj;
}

}  // namespace gms::io
