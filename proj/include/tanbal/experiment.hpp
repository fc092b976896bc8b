#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tanbal/alrs_lyap.hpp"
#include "tanbal/atia_bt.hpp"
#include "tanbal/benchmarks.hpp"
#include "tanbal/errors.hpp"
#include "tanbal/metrics.hpp"
#include "tanbal/parallel.hpp"
#include "tanbal/reducers.hpp"

namespace tanbal {

enum class Task { SolveLyap, AtiaBt, DenseBt, Tcr, Tor, Tsia, Compare };

inline const char* task_name(Task t) {
    switch (t) {
        case Task::SolveLyap: return "solve-lyap";
        case Task::AtiaBt: return "atia-bt";
        case Task::DenseBt: return "dense-bt";
        case Task::Tcr: return "tcr";
        case Task::Tor: return "tor";
        case Task::Tsia: return "tsia";
        case Task::Compare: return "compare";
    }
    return "?";
}

struct ExperimentConfig {
    ModelSpec model;
    Task task = Task::DenseBt;
    AlrsConfig algo;        // r0, dr, tol, i_max, k_max, seed, stage_tol
    Index r = 0;            // fixed order for dense-bt, tcr, tor, tsia
    Index max_iter = 200;   // tsia
    double conv_tol = 1e-8; // tsia
    char gramian = 'P';     // solve-lyap: which Gramian
    std::vector<double> tols;  // compare
    std::string output_dir = "out";
    Index dense_cap = kDenseCap;
};

/// Command-line overrides applied after the file is read.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<Task> task;
};

namespace detail {

// 1-based line of the first occurrence of "key" in the config text, 0 if absent.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

struct ConfigReader {
    const std::string& path;
    const std::string& text;

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ParseError(path, line_of_key(text, key), what);
    }

    void only_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) const {
        if (!obj.is_object()) fail(where, "'" + where + "' must be an object");
        for (const auto& [key, _] : obj.items())
            if (!allowed.count(key)) fail(key, "unknown key '" + key + "' in " + where);
    }

    Index count(const nlohmann::json& obj, const std::string& key, Index fallback) const {
        if (!obj.contains(key)) return fallback;
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) fail(key, "'" + key + "' must be an integer");
        return v.get<Index>();
    }

    double real(const nlohmann::json& obj, const std::string& key, double fallback) const {
        if (!obj.contains(key)) return fallback;
        const auto& v = obj.at(key);
        if (!v.is_number()) fail(key, "'" + key + "' must be a number");
        return v.get<double>();
    }

    std::uint64_t seed(const nlohmann::json& obj, const std::string& key, std::uint64_t fallback) const {
        if (!obj.contains(key)) return fallback;
        const auto& v = obj.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail(key, "'" + key + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(const nlohmann::json& obj, const std::string& key, const std::string& fallback) const {
        if (!obj.contains(key)) return fallback;
        const auto& v = obj.at(key);
        if (!v.is_string()) fail(key, "'" + key + "' must be a string");
        return v.get<std::string>();
    }
};

}  // namespace detail

/// Parses and validates an experiment file (JSON). Every failure is a
/// ParseError carrying the file and, where known, the line.
inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte > 0 ? byte - 1 : 0), '\n'));
        throw ParseError(path, line, "malformed JSON");
    }
    const detail::ConfigReader rd{path, text};
    rd.only_keys(doc, {"model", "task", "params", "seed", "output_dir", "dense_cap"}, "config");

    ExperimentConfig cfg;
    if (!doc.contains("model")) rd.fail("model", "missing 'model'");
    if (!doc.contains("task")) rd.fail("task", "missing 'task'");

    const auto& model = doc.at("model");
    rd.only_keys(model, {"kind", "n", "m", "p", "seed", "a", "b", "c"}, "model");
    const std::string kind = rd.string(model, "kind", "");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    if (kind == "heat_rod") {
        cfg.model.kind = ModelKind::HeatRod;
    } else if (kind == "random_stable") {
        cfg.model.kind = ModelKind::RandomStable;
    } else if (kind == "illustrative4") {
        cfg.model.kind = ModelKind::Illustrative4;
    } else if (kind == "matrix_market") {
        cfg.model.kind = ModelKind::MatrixMarket;
        auto resolve = [&](const std::string& key) {
            const std::string p = rd.string(model, key, "");
            if (p.empty()) rd.fail(key.empty() ? "model" : key, "matrix_market model needs '" + key + "'");
            const std::filesystem::path fp(p);
            const std::string full = fp.is_absolute() ? p : (base / fp).string();
            if (!std::filesystem::exists(full)) rd.fail(key, "file '" + full + "' does not exist");
            return full;
        };
        cfg.model.a_path = resolve("a");
        cfg.model.b_path = resolve("b");
        cfg.model.c_path = resolve("c");
    } else {
        rd.fail("kind", "model kind must be heat_rod, random_stable, illustrative4 or matrix_market");
    }
    cfg.model.n = rd.count(model, "n", 0);
    cfg.model.m = rd.count(model, "m", 1);
    cfg.model.p = rd.count(model, "p", 1);
    cfg.model.seed = rd.seed(model, "seed", 1);
    try {
        cfg.model.validate();
    } catch (const Error& e) {
        rd.fail("model", e.what());
    }

    const std::string task = rd.string(doc, "task", "");
    const std::vector<Task> all{Task::SolveLyap, Task::AtiaBt, Task::DenseBt, Task::Tcr,
                                Task::Tor,       Task::Tsia,   Task::Compare};
    bool known = false;
    for (Task t : all)
        if (task == task_name(t)) {
            cfg.task = t;
            known = true;
        }
    if (!known) rd.fail("task", "unknown task '" + task + "'");

    const nlohmann::json params = doc.contains("params") ? doc.at("params") : nlohmann::json::object();
    rd.only_keys(params, {"r", "r0", "dr", "tol", "stage_tol", "i_max", "k_max", "max_iter", "conv_tol", "gramian", "tols"},
                 "params");
    cfg.r = rd.count(params, "r", 0);
    cfg.algo.r0 = rd.count(params, "r0", cfg.algo.r0);
    cfg.algo.dr = rd.count(params, "dr", cfg.algo.dr);
    cfg.algo.tol = rd.real(params, "tol", cfg.algo.tol);
    cfg.algo.i_max = rd.count(params, "i_max", cfg.algo.i_max);
    cfg.algo.k_max = rd.count(params, "k_max", cfg.algo.k_max);
    if (params.contains("stage_tol")) cfg.algo.stage_tol = rd.real(params, "stage_tol", 0.0);
    cfg.max_iter = rd.count(params, "max_iter", cfg.max_iter);
    cfg.conv_tol = rd.real(params, "conv_tol", cfg.conv_tol);
    const std::string gram = rd.string(params, "gramian", "P");
    if (gram != "P" && gram != "Q") rd.fail("gramian", "'gramian' must be \"P\" or \"Q\"");
    cfg.gramian = gram[0];
    if (params.contains("tols")) {
        const auto& t = params.at("tols");
        if (!t.is_array() || t.empty()) rd.fail("tols", "'tols' must be a non-empty array of numbers");
        for (const auto& v : t) {
            if (!v.is_number()) rd.fail("tols", "'tols' must be a non-empty array of numbers");
            cfg.tols.push_back(v.get<double>());
        }
    }
    cfg.algo.seed = rd.seed(doc, "seed", cfg.algo.seed);
    cfg.output_dir = rd.string(doc, "output_dir", cfg.output_dir);
    cfg.dense_cap = rd.count(doc, "dense_cap", cfg.dense_cap);

    // task/parameter consistency
    try {
        cfg.algo.validate();
    } catch (const Error& e) {
        rd.fail("params", e.what());
    }
    for (double t : cfg.tols)
        if (!(t > 0 && t < 1)) rd.fail("tols", "every entry of 'tols' must lie in (0, 1)");
    const bool fixed_order = cfg.task == Task::DenseBt || cfg.task == Task::Tcr || cfg.task == Task::Tor ||
                             cfg.task == Task::Tsia;
    if (fixed_order && cfg.r < 1) rd.fail("params", std::string("task ") + task_name(cfg.task) + " needs params.r >= 1");
    if (cfg.task == Task::Compare && cfg.tols.empty()) rd.fail("params", "task compare needs params.tols");
    if (cfg.max_iter < 1 || !(cfg.conv_tol > 0)) rd.fail("params", "max_iter must be >= 1 and conv_tol > 0");
    if (cfg.dense_cap < 1) rd.fail("dense_cap", "dense_cap must be >= 1");
    const bool dense_task = cfg.task != Task::SolveLyap && cfg.task != Task::AtiaBt;
    if (dense_task && cfg.model.n > cfg.dense_cap)
        rd.fail("model", std::string("task ") + task_name(cfg.task) + " needs dense Gramians but n exceeds dense_cap");
    if (fixed_order && cfg.model.kind != ModelKind::MatrixMarket) {
        const Index n = cfg.model.kind == ModelKind::Illustrative4 ? 4 : cfg.model.n;
        if (cfg.r > n) rd.fail("r", "params.r exceeds the model order");
    }
    return cfg;
}

struct ErrorRow {
    std::string metric;
    double value = 0.0;
    Index r = 0;
};

struct HistoryRow {
    Index k = 0, i = 0, r = 0, index = 0;
    double value = 0.0;
};

struct CompareRow {
    double tol = 0.0;
    Index r = 0;
    double atia = 0.0;
    double bt = 0.0;
    bool converged = false;
};

struct Artifacts {
    std::vector<double> hsv;
    std::vector<ErrorRow> errors;
    std::vector<HistoryRow> history;
    std::vector<CompareRow> compare;
    bool converged = true;
};

namespace detail {

inline void append_history(std::vector<HistoryRow>& out, const IterationRecord& rec) {
    for (Index j = 0; j < rec.values.size(); ++j) out.push_back({rec.k, rec.i, rec.r, j + 1, rec.values(j)});
}

inline ReducedModel seeded_rom(const StateSpaceModel& model, Index r, std::uint64_t seed) {
    auto ga = substream(seed, kStreamA);
    auto gb = substream(seed, kStreamB);
    auto gc = substream(seed, kStreamC);
    Matrix ar = shift_to_stable(gaussian_matrix(ga, r, r));
    Matrix br = gaussian_matrix(gb, r, model.m());
    Matrix cr = gaussian_matrix(gc, model.p(), r);
    return {StateSpaceModel::dense(std::move(ar), std::move(br), std::move(cr)), Matrix(), Matrix(), std::nullopt};
}

inline double hinf(const StateSpaceModel& model, const StateSpaceModel& rom, Index cap) {
    return hinf_rel_error(model, rom, FreqGrid::for_model(model, &rom, 400, cap));
}

}  // namespace detail

/// Runs the configured task in memory; nothing is written here.
inline Artifacts execute(const ExperimentConfig& cfg) {
    const StateSpaceModel model = cfg.model.build();
    const bool dense_ok = model.n() <= cfg.dense_cap;
    Artifacts out;

    switch (cfg.task) {
        case Task::SolveLyap: {
            const bool q = cfg.gramian == 'Q';
            const StateSpaceModel src = q ? model.dual() : model;
            const AlrsResult res = alrs_lyap(src.a(), src.b(), cfg.algo);
            const Vector sv = res.singular_values().values;
            out.hsv.assign(sv.data(), sv.data() + sv.size());
            const Index r = res.factor.rank();
            out.errors.push_back({std::string("lyapunov_residual_") + cfg.gramian, res.residual, r});
            if (dense_ok) {
                const Matrix a = src.dense_a(cfg.dense_cap);
                const Matrix g = solve_lyapunov_dense(a, src.b() * src.b().transpose());
                out.errors.push_back({std::string("gramian_rel_error_") + cfg.gramian, gramian_rel_error(g, res.factor), r});
            }
            for (const auto& h : res.history) detail::append_history(out.history, h);
            out.converged = res.converged;
            break;
        }
        case Task::AtiaBt: {
            const AtiaResult res = atia_bt(model, cfg.algo);
            const Vector& sv = res.hankel_estimates.values;
            out.hsv.assign(sv.data(), sv.data() + sv.size());
            const Index r = res.rom.order();
            if (dense_ok) {
                out.errors.push_back({"hinf_rel_error_atia", detail::hinf(model, res.rom.rom, cfg.dense_cap), r});
                double worst = 0.0;
                for (const auto& row : atia_hsv_compare(res, model, cfg.dense_cap)) worst = std::max(worst, row.rel_diff);
                out.errors.push_back({"hsv_max_rel_diff", worst, r});
            }
            for (const auto& h : res.history) detail::append_history(out.history, h);
            out.converged = res.converged;
            break;
        }
        case Task::DenseBt: {
            const GramianPair g = gramians_dense(model);
            const ReducedModel red = bt_square_root(model, g, cfg.r);
            const Vector& sv = red.retained_sv->values;
            out.hsv.assign(sv.data(), sv.data() + sv.size());
            out.errors.push_back({"hinf_rel_error_bt", detail::hinf(model, red.rom, cfg.dense_cap), cfg.r});
            out.errors.push_back({"pq_rel_error", pq_rel_error(g, red), cfg.r});
            break;
        }
        case Task::Tcr:
        case Task::Tor: {
            const bool c = cfg.task == Task::Tcr;
            const ReducedModel red = c ? tcr(model, cfg.r) : tor(model, cfg.r);
            const Vector& sv = red.retained_sv->values;
            out.hsv.assign(sv.data(), sv.data() + sv.size());
            const Matrix a = model.dense_a(cfg.dense_cap);
            const Matrix g = c ? solve_lyapunov_dense(a, model.b() * model.b().transpose())
                               : solve_lyapunov_dense(a.transpose(), model.c().transpose() * model.c());
            const Matrix rg = c ? solve_lyapunov_dense(red.ar(), red.br() * red.br().transpose())
                                : solve_lyapunov_dense(red.ar().transpose(), red.cr().transpose() * red.cr());
            out.errors.push_back({c ? "gramian_rel_error_P" : "gramian_rel_error_Q",
                                  gramian_rel_error(g, {red.vr, rg}), cfg.r});
            out.errors.push_back({c ? "hinf_rel_error_tcr" : "hinf_rel_error_tor",
                                  detail::hinf(model, red.rom, cfg.dense_cap), cfg.r});
            break;
        }
        case Task::Tsia: {
            const TsiaResult res = tsia(model, detail::seeded_rom(model, cfg.r, cfg.algo.seed), cfg.max_iter, cfg.conv_tol);
            const Vector sv = hankel_singular_values(res.rom.rom).values;
            out.hsv.assign(sv.data(), sv.data() + sv.size());
            out.errors.push_back({"wilson_residual", wilson_residuals(model, res.rom).max(), cfg.r});
            out.errors.push_back({"hinf_rel_error_tsia", detail::hinf(model, res.rom.rom, cfg.dense_cap), cfg.r});
            out.errors.push_back({"iterations", static_cast<double>(res.iterations), cfg.r});
            out.converged = res.converged;
            break;
        }
        case Task::Compare: {
            const GramianPair g = gramians_dense(model);
            for (double tol : cfg.tols) {
                AlrsConfig c = cfg.algo;
                c.tol = tol;
                const AtiaResult res = atia_bt(model, c);
                const Index r = res.rom.order();
                const ReducedModel bt = bt_square_root(model, g, r);
                const FreqGrid grid = FreqGrid::for_model(model, &res.rom.rom, 400, cfg.dense_cap);
                out.compare.push_back({tol, r, hinf_rel_error(model, res.rom.rom, grid),
                                       hinf_rel_error(model, bt.rom, grid), res.converged});
                out.converged = out.converged && res.converged;
            }
            break;
        }
    }
    return out;
}

namespace detail {

inline std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15e", v);
    return buf;
}

inline void write_text(const std::filesystem::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + p.string() + "'");
    f << body;
    if (!f) throw Error(ErrorKind::InvalidArgument, "failed writing '" + p.string() + "'");
}

}  // namespace detail

inline nlohmann::json resolved_config_json(const ExperimentConfig& cfg) {
    nlohmann::json model;
    switch (cfg.model.kind) {
        case ModelKind::HeatRod: model = {{"kind", "heat_rod"}, {"n", cfg.model.n}}; break;
        case ModelKind::RandomStable:
            model = {{"kind", "random_stable"}, {"n", cfg.model.n}, {"m", cfg.model.m}, {"p", cfg.model.p},
                     {"seed", cfg.model.seed}};
            break;
        case ModelKind::Illustrative4: model = {{"kind", "illustrative4"}}; break;
        case ModelKind::MatrixMarket:
            model = {{"kind", "matrix_market"}, {"a", cfg.model.a_path}, {"b", cfg.model.b_path}, {"c", cfg.model.c_path}};
            break;
    }
    nlohmann::json params = {{"r0", cfg.algo.r0},   {"dr", cfg.algo.dr},       {"tol", cfg.algo.tol},
                             {"i_max", cfg.algo.i_max}, {"k_max", cfg.algo.k_max}, {"stage_tol", cfg.algo.effective_stage_tol()},
                             {"max_iter", cfg.max_iter}, {"conv_tol", cfg.conv_tol}, {"gramian", std::string(1, cfg.gramian)}};
    if (cfg.r > 0) params["r"] = cfg.r;
    if (!cfg.tols.empty()) params["tols"] = cfg.tols;
    return {{"model", model},           {"task", task_name(cfg.task)},  {"params", params},
            {"seed", cfg.algo.seed},    {"output_dir", cfg.output_dir}, {"dense_cap", cfg.dense_cap}};
}

/// Writes hsv.csv, errors.csv, history.csv (and compare.csv for comparisons)
/// plus run.json into cfg.output_dir.
inline void write_artifacts(const ExperimentConfig& cfg, const Artifacts& art, double seconds, int status) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    std::string hsv = "index,value\n";
    for (std::size_t j = 0; j < art.hsv.size(); ++j) hsv += std::to_string(j + 1) + "," + detail::sci(art.hsv[j]) + "\n";
    std::string err = "metric,value,r\n";
    for (const auto& e : art.errors) err += e.metric + "," + detail::sci(e.value) + "," + std::to_string(e.r) + "\n";
    std::string hist = "k,i,r,index,value\n";
    for (const auto& h : art.history)
        hist += std::to_string(h.k) + "," + std::to_string(h.i) + "," + std::to_string(h.r) + "," +
                std::to_string(h.index) + "," + detail::sci(h.value) + "\n";
    detail::write_text(dir / "hsv.csv", hsv);
    detail::write_text(dir / "errors.csv", err);
    detail::write_text(dir / "history.csv", hist);
    if (cfg.task == Task::Compare) {
        std::string cmp = "tol,r_selected,atia_hinf_ratio,bt_hinf_ratio,converged\n";
        for (const auto& c : art.compare)
            cmp += detail::sci(c.tol) + "," + std::to_string(c.r) + "," + detail::sci(c.atia) + "," + detail::sci(c.bt) +
                   "," + (c.converged ? "true" : "false") + "\n";
        detail::write_text(dir / "compare.csv", cmp);
    }
    nlohmann::json run = {{"config", resolved_config_json(cfg)},
                          {"seed", cfg.algo.seed},
                          {"threads", thread_count()},
                          {"wall_clock_seconds", seconds},
                          {"converged", art.converged},
                          {"exit_status", status}};
    detail::write_text(dir / "run.json", run.dump(2) + "\n");
}

/// Full run: parse, override, execute, write. Returns the process exit
/// status: 0 success, 2 finished without convergence (artifacts written),
/// 1 input or algorithm error (nothing written).
inline int run_experiment(const std::string& config_path, const RunOverrides& ov, std::ostream& log = std::cerr) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    if (ov.seed) cfg.algo.seed = *ov.seed;
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;
    if (ov.task) {
        cfg.task = *ov.task;
        if (cfg.task == Task::Compare && cfg.tols.empty()) {
            log << "error: " << config_path << ": compare needs params.tols\n";
            return 1;
        }
    }

    const auto start = std::chrono::steady_clock::now();
    Artifacts art;
    try {
        art = execute(cfg);
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const int status = art.converged ? 0 : 2;
    try {
        write_artifacts(cfg, art, seconds, status);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    if (status == 2) log << "warning: iteration limit reached before convergence; artifacts written\n";
    return status;
}

}  // namespace tanbal
