#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isnn/cmaes.hpp"
#include "isnn/gate.hpp"
#include "isnn/nnpotential.hpp"
#include "isnn/toyfunc.hpp"
#include "isnn/train.hpp"

namespace isnn {

inline constexpr int kFormatVersion = 1;

using json = nlohmann::json;

inline void check_format_version(const json& j, const char* what) {
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
        throw IoError(std::string(what) + ": missing format_version");
    if (j["format_version"].get<int>() != kFormatVersion)
        throw IoError(std::string(what) + ": unsupported format_version "
                      + std::to_string(j["format_version"].get<int>()));
}

// ---------------------------------------------------------------------------
// JSON: architecture, parameters, potentials

inline json arch_to_json(const ArchSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["n_x"] = s.n_x;
    j["n_y"] = s.n_y;
    j["n_t"] = s.n_t;
    j["n_z"] = s.n_z;
    j["x_widths"] = s.x_widths;
    j["y_widths"] = s.y_widths;
    j["t_widths"] = s.t_widths;
    j["z_widths"] = s.z_widths;
    j["output_activation"] = s.output_activation == OutputAct::Softplus ? "softplus" : "linear";
    return j;
}

inline ArchSpec arch_from_json(const json& j) {
    ArchSpec s;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "isnn1") s.kind = ArchKind::Isnn1;
    else if (kind == "isnn2") s.kind = ArchKind::Isnn2;
    else if (kind == "ffnn") s.kind = ArchKind::Ffnn;
    else throw IoError("arch_from_json: unknown kind " + kind);
    s.n_x = j.at("n_x").get<int>();
    s.n_y = j.at("n_y").get<int>();
    s.n_t = j.at("n_t").get<int>();
    s.n_z = j.at("n_z").get<int>();
    s.x_widths = j.at("x_widths").get<std::vector<int>>();
    s.y_widths = j.at("y_widths").get<std::vector<int>>();
    s.t_widths = j.at("t_widths").get<std::vector<int>>();
    s.z_widths = j.at("z_widths").get<std::vector<int>>();
    s.output_activation = j.at("output_activation").get<std::string>() == "softplus"
        ? OutputAct::Softplus : OutputAct::Linear;
    s.validate();
    return s;
}

// Raw values serialize through nlohmann's shortest-round-trip doubles, so a
// save/load cycle reproduces them bit for bit. Constraint tags are stored
// per block and cross-checked against the rebuilt layout on load.
inline json params_to_json(const IsnnParams& p) {
    json j;
    j["format_version"] = kFormatVersion;
    j["arch_spec"] = arch_to_json(p.spec);
    j["seed"] = p.seed;
    j["raw_params"] = p.raw;
    json blocks = json::array();
    for (const ParamBlock& b : p.blocks) {
        json jb;
        jb["name"] = b.name;
        jb["rows"] = b.rows;
        jb["cols"] = b.cols;
        jb["bias"] = b.bias;
        jb["tag"] = b.tag == ParamTag::NonNegative ? "non_negative" : "free";
        blocks.push_back(jb);
    }
    j["constraint_tags"] = blocks;
    return j;
}

inline IsnnParams params_from_json(const json& j) {
    check_format_version(j, "model");
    IsnnParams p = make_param_layout(arch_from_json(j.at("arch_spec")));
    p.seed = j.at("seed").get<std::uint64_t>();
    const std::vector<double> raw = j.at("raw_params").get<std::vector<double>>();
    if (raw.size() != p.raw.size()) throw IoError("model: raw_params length mismatch");
    p.raw = raw;
    const json& blocks = j.at("constraint_tags");
    if (blocks.size() != p.blocks.size()) throw IoError("model: block count mismatch");
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        const std::string tag = blocks[i].at("tag").get<std::string>();
        const ParamTag want = tag == "non_negative" ? ParamTag::NonNegative : ParamTag::Free;
        if (want != p.blocks[i].tag) throw IoError("model: constraint tag mismatch at " + p.blocks[i].name);
    }
    return p;
}

inline json potential_to_json(const NnPotential& p) {
    json j;
    j["format_version"] = kFormatVersion;
    j["type"] = "nn_potential";
    j["net"] = params_to_json(p.net);
    j["transiso"] = p.transiso;
    j["monotone_design"] = p.monotone_design;
    j["free_design"] = p.free_design;
    j["in_shift"] = p.in_shift;
    j["in_scale"] = p.in_scale;
    j["out_scale"] = p.out_scale;
    j["corrections"] = p.corrections;
    return j;
}

inline NnPotential potential_from_json(const json& j) {
    check_format_version(j, "potential");
    NnPotential p;
    p.net = params_from_json(j.at("net"));
    p.transiso = j.at("transiso").get<bool>();
    p.monotone_design = j.at("monotone_design").get<std::vector<std::string>>();
    p.free_design = j.at("free_design").get<std::vector<std::string>>();
    p.in_shift = j.at("in_shift").get<Vec>();
    p.in_scale = j.at("in_scale").get<Vec>();
    p.out_scale = j.at("out_scale").get<double>();
    p.corrections = j.at("corrections").get<bool>();
    if (p.in_shift.size() != static_cast<std::size_t>(p.n_inputs()) || p.in_scale.size() != p.in_shift.size())
        throw IoError("potential: normalization size mismatch");
    return p;
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
    return j;
}

// ---------------------------------------------------------------------------
// CSV helpers

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

// toy dataset: header x,y,t,z,target
inline void write_toy_csv(const std::string& path, const ToyDataset& d) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "x,y,t,z,target\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t c = 0; c < 4; ++c) out << detail::fmt_double(d.inputs(i, c)) << ",";
        out << detail::fmt_double(d.targets[i]) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

inline ToyDataset read_toy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty csv: " + path);
    if (detail::split_csv_line(line) != std::vector<std::string>{"x", "y", "t", "z", "target"})
        throw IoError("unexpected toy csv header in " + path);
    std::vector<std::array<double, 5>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() != 5) throw IoError("bad toy csv row in " + path);
        std::array<double, 5> r{};
        for (std::size_t c = 0; c < 5; ++c) r[c] = std::stod(f[c]);
        rows.push_back(r);
    }
    ToyDataset d;
    d.inputs = Mat(rows.size(), 4);
    d.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < 4; ++c) d.inputs(i, c) = rows[i][c];
        d.targets[i] = rows[i][4];
    }
    return d;
}

// material dataset: F11..F33,<design...>,S11,S22,S33,S12,S13,S23 plus a
// metadata sidecar (<path>.meta.json) carrying provenance
inline void write_material_csv(const std::string& path, const MaterialDataset& d) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "F11,F12,F13,F21,F22,F23,F31,F32,F33";
    for (const std::string& name : d.design_names) out << "," << name;
    out << ",S11,S22,S33,S12,S13,S23\n";
    for (const MaterialRow& row : d.rows) {
        for (int k = 0; k < 9; ++k) {
            if (k) out << ",";
            out << detail::fmt_double(row.F.m[static_cast<std::size_t>(k)]);
        }
        for (double v : row.design) out << "," << detail::fmt_double(v);
        for (double v : row.stress) out << "," << detail::fmt_double(v);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);

    json meta;
    meta["format_version"] = kFormatVersion;
    meta["potential"] = d.potential;
    meta["delta"] = d.delta;
    meta["seed"] = d.seed;
    meta["design_names"] = d.design_names;
    meta["has_direction"] = d.has_direction;
    if (d.has_direction) meta["direction"] = d.direction;
    save_json(path + ".meta.json", meta);
}

inline MaterialDataset read_material_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty csv: " + path);
    const std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() < 15 || header.front() != "F11" || header.back() != "S23")
        throw IoError("unexpected material csv header in " + path);
    MaterialDataset d;
    for (std::size_t c = 9; c + 6 < header.size(); ++c) d.design_names.push_back(header[c]);
    const std::size_t n_design = d.design_names.size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() != 15 + n_design) throw IoError("bad material csv row in " + path);
        MaterialRow row;
        for (int k = 0; k < 9; ++k) row.F.m[static_cast<std::size_t>(k)] = std::stod(f[static_cast<std::size_t>(k)]);
        for (std::size_t c = 0; c < n_design; ++c) row.design.push_back(std::stod(f[9 + c]));
        for (int k = 0; k < 6; ++k)
            row.stress[static_cast<std::size_t>(k)] = std::stod(f[9 + n_design + static_cast<std::size_t>(k)]);
        d.rows.push_back(row);
    }
    const std::string meta_path = path + ".meta.json";
    if (std::filesystem::exists(meta_path)) {
        const json meta = load_json(meta_path);
        check_format_version(meta, "dataset metadata");
        d.potential = meta.value("potential", "");
        d.delta = meta.value("delta", 0.0);
        d.seed = meta.value("seed", std::uint64_t{0});
        d.has_direction = meta.value("has_direction", false);
        if (d.has_direction) {
            const auto dir = meta.at("direction").get<std::vector<double>>();
            if (dir.size() != 3) throw IoError("dataset metadata: direction must have 3 entries");
            d.direction = {dir[0], dir[1], dir[2]};
        }
    }
    return d;
}

inline void write_loss_history_csv(const std::string& path, const std::vector<LossPoint>& hist) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    const bool with_test = !hist.empty() && hist.front().has_test;
    out << (with_test ? "epoch,train_mse,test_mse\n" : "epoch,train_mse\n");
    for (const LossPoint& pt : hist) {
        out << pt.epoch << "," << detail::fmt_double(pt.train_mse);
        if (with_test) out << "," << detail::fmt_double(pt.test_mse);
        out << "\n";
    }
}

inline void write_stress_history_csv(const std::string& path,
                                     const std::vector<std::pair<int, double>>& hist) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "epoch,train_mse\n";
    for (const auto& [epoch, loss] : hist) out << epoch << "," << detail::fmt_double(loss) << "\n";
}

inline void write_gate_history_csv(const std::string& path,
                                   const std::vector<GateHistoryPoint>& hist) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "epoch,loss,sigmoid_g,gate\n";
    for (const GateHistoryPoint& pt : hist)
        out << pt.epoch << "," << detail::fmt_double(pt.loss) << ","
            << detail::fmt_double(pt.sigmoid_g) << "," << detail::fmt_double(pt.gate) << "\n";
}

// CMA-ES trajectory: iteration,param_1,...,param_k,objective
inline void write_trajectory_csv(const std::string& path, const CmaResult& r,
                                 const std::vector<std::string>& param_names) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "iteration";
    for (std::size_t i = 0; i < param_names.size(); ++i) out << ",param_" << i + 1;
    out << ",objective\n";
    for (std::size_t g = 0; g < r.mean_trajectory.size(); ++g) {
        out << g + 1;
        for (double v : r.mean_trajectory[g]) out << "," << detail::fmt_double(v);
        out << "," << detail::fmt_double(r.history[g].second) << "\n";
    }
}

struct BenchRow {
    std::size_t n_params = 0;
    double md_ns = 0.0, ad_ns = 0.0;

    double ratio() const { return md_ns > 0.0 ? ad_ns / md_ns : 0.0; }
};

inline void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "n_params,md_ns,ad_ns,ratio\n";
    for (const BenchRow& r : rows)
        out << r.n_params << "," << detail::fmt_double(r.md_ns) << ","
            << detail::fmt_double(r.ad_ns) << "," << detail::fmt_double(r.ratio()) << "\n";
}

} // namespace isnn
