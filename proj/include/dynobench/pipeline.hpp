#pragma once

// End-to-end pipeline over a work directory: generate map files, run the
// trial matrix, compute and normalize metrics, evaluate, fit the difficulty
// model, synthesize a target map, and score holdout generalization.
//
// Two rules make runs reproducible and resumable:
//   1. A stage whose output files already exist is skipped (unless forced).
//   2. Every stage re-reads its own output files before anything downstream
//      consumes them, so fresh and resumed runs see byte-identical inputs
//      even where the text round-trip loses precision.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynobench/analysis.hpp"
#include "dynobench/config.hpp"
#include "dynobench/harness.hpp"
#include "dynobench/map_io.hpp"
#include "dynobench/metrics.hpp"
#include "dynobench/world.hpp"

namespace dynobench {

// ---------------------------------------------------------------------------
// Scales
// ---------------------------------------------------------------------------

/// Desk is the full benchmark (54 fit maps, six planner-gaze pairs). Micro
/// shrinks every dataset knob to a smoke size that finishes in seconds and
/// is used for determinism double-runs.
enum class Scale { Desk, Micro };

inline const char* to_string(Scale s) {
    return s == Scale::Desk ? "desk" : "micro";
}

inline Scale scale_from_string(const std::string& s) {
    if (s == "desk") return Scale::Desk;
    if (s == "micro") return Scale::Micro;
    throw std::invalid_argument("unknown scale '" + s +
                                "' (expected 'desk' or 'micro')");
}

inline std::vector<std::pair<std::string, std::string>> scale_pairs(Scale s) {
    if (s == Scale::Micro) {
        return {{"mpc", "full-range"}, {"local-primitive", "full-range"}};
    }
    return {{"global-primitive", "full-range"}, {"global-primitive", "look-ahead"},
            {"mpc", "full-range"},              {"mpc", "look-ahead"},
            {"local-primitive", "full-range"},  {"local-primitive", "look-ahead"}};
}

inline RunConfig apply_scale(RunConfig base, Scale s) {
    if (s == Scale::Micro) {
        base.seeds_per_cell = 1;
        base.dataset2_per_type = 2;
    }
    return base;
}

// ---------------------------------------------------------------------------
// Work-directory layout
// ---------------------------------------------------------------------------

struct PipelinePaths {
    std::filesystem::path root;
    std::filesystem::path fit_map_dir;
    std::filesystem::path holdout_map_dir;
    std::filesystem::path results_csv;
    std::filesystem::path success_csv;
    std::filesystem::path holdout_results_csv;
    std::filesystem::path holdout_success_csv;
    std::filesystem::path metrics_csv;
    std::filesystem::path normalization_json;
    std::filesystem::path holdout_metrics_csv;
    std::filesystem::path eval_csv;
    std::filesystem::path velocity_csv;
    std::filesystem::path model_txt;
    std::filesystem::path synth_txt;
    std::filesystem::path synth_map;
    std::filesystem::path generalization_txt;
    std::filesystem::path acceptance_txt;

    static PipelinePaths in(const std::filesystem::path& root) {
        PipelinePaths p;
        p.root = root;
        p.fit_map_dir = root / "maps";
        p.holdout_map_dir = root / "maps_holdout";
        p.results_csv = root / "results.csv";
        p.success_csv = root / "success.csv";
        p.holdout_results_csv = root / "results_holdout.csv";
        p.holdout_success_csv = root / "success_holdout.csv";
        p.metrics_csv = root / "metrics.csv";
        p.normalization_json = root / "normalization.json";
        p.holdout_metrics_csv = root / "metrics_holdout.csv";
        p.eval_csv = root / "eval.csv";
        p.velocity_csv = root / "eval_velocity.csv";
        p.model_txt = root / "model.txt";
        p.synth_txt = root / "synth.txt";
        p.synth_map = root / "synth_map.map";
        p.generalization_txt = root / "generalization.txt";
        p.acceptance_txt = root / "acceptance.txt";
        return p;
    }
};

/// Wall-time bookkeeping for one stage. `computed` is false when existing
/// outputs were reused, in which case `seconds` stays zero.
struct StageInfo {
    bool computed{false};
    double seconds{0.0};
};

namespace detail {

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spill(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

inline void note(std::ostream* log, const std::string& line) {
    if (log) *log << line << '\n' << std::flush;
}

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Writes any missing map file for `specs` into `dir` (wiping the directory
/// first when `force`), then loads every expected file back, sorted by id.
/// Downstream stages always consume these re-read worlds: a heterogeneous
/// spec realizes its parameter ranges at expansion, so only the file carries
/// the exact obstacles a resumed run must replay.
inline std::vector<World> ensure_maps(const std::filesystem::path& dir,
                                      std::vector<MapSpec> specs, bool force,
                                      StageInfo* info = nullptr,
                                      std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    if (force) fs::remove_all(dir);
    fs::create_directories(dir);
    std::sort(specs.begin(), specs.end(),
              [](const MapSpec& a, const MapSpec& b) { return a.id < b.id; });
    const auto t0 = std::chrono::steady_clock::now();
    int written = 0;
    for (const MapSpec& spec : specs) {
        const fs::path path = dir / (spec.id + ".map");
        if (fs::exists(path)) continue;
        write_map_file(expand(spec), path);
        ++written;
    }
    if (info) {
        info->computed = written > 0;
        info->seconds = written > 0 ? detail::seconds_since(t0) : 0.0;
    }
    detail::note(log, "maps: " + std::to_string(written) + " written, " +
                          std::to_string(specs.size() - written) + " reused in " +
                          dir.string());
    std::vector<World> worlds;
    worlds.reserve(specs.size());
    for (const MapSpec& spec : specs) {
        worlds.push_back(load_map_file(dir / (spec.id + ".map")));
    }
    return worlds;
}

/// Loads every *.map file in `dir`, sorted by filename.
inline std::vector<World> load_map_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("not a directory: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".map") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw std::runtime_error("no .map files in " + dir.string());
    }
    std::sort(files.begin(), files.end());
    std::vector<World> worlds;
    worlds.reserve(files.size());
    for (const fs::path& f : files) worlds.push_back(load_map_file(f));
    return worlds;
}

/// Runs the full trial matrix unless both output files exist, then reads the
/// success table back from `success_path`. Any errored trial aborts the
/// stage: a partial table would silently skew every statistic downstream.
inline SuccessTable ensure_trials(
    const std::filesystem::path& results_path,
    const std::filesystem::path& success_path, const std::vector<World>& worlds,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const RunConfig& cfg, bool force, StageInfo* info = nullptr,
    std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    const bool have =
        !force && fs::exists(results_path) && fs::exists(success_path);
    if (have) {
        detail::note(log, "trials: reusing " + results_path.string());
        if (info) *info = {};
    } else {
        const auto t0 = std::chrono::steady_clock::now();
        const MatrixResult res =
            run_matrix(worlds, pairs, cfg.robot(), cfg.jobs, {}, cfg.time_limit,
                       cfg.grid_resolution);
        if (!res.errors.empty()) {
            throw std::runtime_error(
                "trial stage: " + std::to_string(res.errors.size()) +
                " trials failed, first: " + res.errors.front());
        }
        {
            std::ofstream out(results_path, std::ios::binary);
            if (!out) {
                throw std::runtime_error("cannot open for writing: " +
                                         results_path.string());
            }
            write_results_csv(res.records, out);
        }
        {
            std::ofstream out(success_path, std::ios::binary);
            if (!out) {
                throw std::runtime_error("cannot open for writing: " +
                                         success_path.string());
            }
            write_success_csv(res.table, out);
        }
        if (info) {
            info->computed = true;
            info->seconds = detail::seconds_since(t0);
        }
        detail::note(log, "trials: " + std::to_string(res.records.size()) +
                              " run in " +
                              detail::fmt3(detail::seconds_since(t0)) + " s");
    }
    return read_success_file(success_path.string());
}

/// Lattice for metric sampling per the config knobs.
inline SampleLattice lattice_for(const RunConfig& cfg, double width_m,
                                 double height_m) {
    SampleLattice lat = make_lattice(width_m, height_m, cfg.d_sample);
    lat.directions_per_position = cfg.directions;
    lat.velocity_samples = cfg.velocity_samples;
    lat.time_samples = cfg.time_samples;
    lat.t_sample = cfg.t_sample;
    lat.start_time_samples = cfg.start_samples;
    return lat;
}

/// Raw metrics of one world under the config's sampling knobs.
inline MetricReport metric_report_for(const World& world, const RunConfig& cfg) {
    const SampleLattice lat =
        lattice_for(cfg, world.spec.width_m, world.spec.height_m);
    const ReplayLog log = ReplayLog::record(
        world, metric_replay_span(lat, cfg.t_max), cfg.replay_dt);
    return compute_metrics(log, world.spec.id, lat, cfg.t_max, cfg.robot());
}

/// Computes and normalizes metrics for every world unless the csv and its
/// normalization sidecar exist; always returns the file-read reports and
/// normalization.
inline std::pair<std::vector<MetricReport>, Normalization> ensure_metrics(
    const std::filesystem::path& csv_path,
    const std::filesystem::path& norm_path, const std::vector<World>& worlds,
    const RunConfig& cfg, bool force, StageInfo* info = nullptr,
    std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    const bool have = !force && fs::exists(csv_path) && fs::exists(norm_path);
    if (have) {
        detail::note(log, "metrics: reusing " + csv_path.string());
        if (info) *info = {};
    } else {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<MetricReport> reports;
        reports.reserve(worlds.size());
        for (const World& w : worlds) reports.push_back(metric_report_for(w, cfg));
        const Normalization norm = preprocess(reports);
        write_metrics_csv(csv_path.string(), reports);
        detail::spill(norm_path, norm.to_json());
        if (info) {
            info->computed = true;
            info->seconds = detail::seconds_since(t0);
        }
        detail::note(log, "metrics: " + std::to_string(reports.size()) +
                              " maps in " +
                              detail::fmt3(detail::seconds_since(t0)) + " s");
    }
    return {read_metrics_csv_file(csv_path.string()),
            Normalization::from_json(detail::slurp(norm_path))};
}

/// Holdout variant: raw metrics projected through an existing normalization
/// (never refitted, so holdout difficulty lives on the fit set's scale).
inline std::vector<MetricReport> ensure_holdout_metrics(
    const std::filesystem::path& csv_path, const std::vector<World>& worlds,
    const Normalization& norm, const RunConfig& cfg, bool force,
    StageInfo* info = nullptr, std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    if (force || !fs::exists(csv_path)) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<MetricReport> reports;
        reports.reserve(worlds.size());
        for (const World& w : worlds) {
            MetricReport rep = metric_report_for(w, cfg);
            apply_normalization(norm, rep);
            reports.push_back(std::move(rep));
        }
        write_metrics_csv(csv_path.string(), reports);
        if (info) {
            info->computed = true;
            info->seconds = detail::seconds_since(t0);
        }
        detail::note(log, "holdout metrics: " + std::to_string(reports.size()) +
                              " maps in " +
                              detail::fmt3(detail::seconds_since(t0)) + " s");
    } else {
        detail::note(log, "holdout metrics: reusing " + csv_path.string());
        if (info) *info = {};
    }
    return read_metrics_csv_file(csv_path.string());
}

// ---------------------------------------------------------------------------
// Reproduce
// ---------------------------------------------------------------------------

struct ReproduceResult {
    RunConfig config;  // after scale adjustment
    Scale scale{Scale::Desk};
    PipelinePaths paths;
    std::vector<std::pair<std::string, std::string>> pairs;

    std::vector<World> fit_worlds;  // file-loaded, sorted by id
    std::vector<World> holdout_worlds;
    SuccessTable fit_table;
    SuccessTable holdout_table;
    std::vector<MetricReport> fit_reports;
    std::vector<MetricReport> holdout_reports;
    Normalization normalization;
    std::vector<EvaluationResult> eval;
    std::vector<std::pair<std::string, std::vector<VelocityGroupResult>>> velocity;
    RegressionModel model;
    SynthesisResult synth;
    GeneralizationResult generalization;

    StageInfo map_stage, holdout_map_stage, trial_stage, holdout_trial_stage,
        metric_stage, holdout_metric_stage;
};

namespace detail {

inline std::string synth_summary_text(const SynthesisResult& s, double target) {
    std::ostringstream os;
    os << "target " << fmt_g17(target) << '\n';
    os << "n_obs " << s.n_obs << '\n';
    os << "r_obs " << fmt_g17(s.r_obs) << '\n';
    os << "v_obs " << fmt_g17(s.v_obs) << '\n';
    os << "predicted " << fmt_g17(s.predicted) << '\n';
    os << "objective " << fmt_g17(s.objective) << '\n';
    return os.str();
}

inline std::string generalization_text(const GeneralizationResult& g) {
    std::ostringstream os;
    os << "mean_sigma_distance " << fmt_g17(g.mean_sigma_distance) << '\n';
    os << "frac_within_3sigma " << fmt_g17(g.frac_within_3sigma) << '\n';
    os << "evaluated " << g.evaluated << '\n';
    os << "excluded " << g.excluded << '\n';
    os << "usable_bins " << g.usable_bins << '\n';
    os << "seen_bins " << g.seen_bins << '\n';
    return os.str();
}

}  // namespace detail

/// Runs the whole pipeline at `scale` inside `out_dir`. Existing stage
/// outputs are reused unless `force`; the summary statistics (evaluation,
/// model, synthesis, generalization) are recomputed in memory every time
/// from the file-read inputs, and their files written when absent or forced.
inline ReproduceResult reproduce(const RunConfig& base, Scale scale,
                                 const std::filesystem::path& out_dir,
                                 bool force = false,
                                 std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    ReproduceResult r;
    r.config = apply_scale(base, scale);
    r.config.validate();
    r.scale = scale;
    r.paths = PipelinePaths::in(out_dir);
    r.pairs = scale_pairs(scale);
    fs::create_directories(out_dir);

    // Stage 1: map files.
    DatasetIParams dataset1;
    dataset1.seeds_per_cell = r.config.seeds_per_cell;
    r.fit_worlds = ensure_maps(r.paths.fit_map_dir,
                               generate_dataset_I(dataset1, r.config.base_seed),
                               force, &r.map_stage, log);
    std::vector<MapSpec> holdout_specs;
    for (DatasetIIType type :
         {DatasetIIType::a, DatasetIIType::b, DatasetIIType::c}) {
        std::vector<MapSpec> part = generate_dataset_II(
            type, r.config.dataset2_per_type, r.config.base_seed);
        holdout_specs.insert(holdout_specs.end(), part.begin(), part.end());
    }
    r.holdout_worlds = ensure_maps(r.paths.holdout_map_dir, holdout_specs, force,
                                   &r.holdout_map_stage, log);

    // Stage 2: trial matrices.
    r.fit_table = ensure_trials(r.paths.results_csv, r.paths.success_csv,
                                r.fit_worlds, r.pairs, r.config, force,
                                &r.trial_stage, log);
    r.holdout_table = ensure_trials(
        r.paths.holdout_results_csv, r.paths.holdout_success_csv,
        r.holdout_worlds, r.pairs, r.config, force, &r.holdout_trial_stage, log);

    // Stage 3: metrics, normalized over the fit set only.
    std::tie(r.fit_reports, r.normalization) =
        ensure_metrics(r.paths.metrics_csv, r.paths.normalization_json,
                       r.fit_worlds, r.config, force, &r.metric_stage, log);
    r.holdout_reports = ensure_holdout_metrics(
        r.paths.holdout_metrics_csv, r.holdout_worlds, r.normalization, r.config,
        force, &r.holdout_metric_stage, log);

    // Stage 4: analysis artifacts.
    std::vector<MapSpec> fit_specs;
    fit_specs.reserve(r.fit_worlds.size());
    for (const World& w : r.fit_worlds) fit_specs.push_back(w.spec);

    r.eval = evaluate_all(r.fit_table, r.fit_reports);
    if (force || !fs::exists(r.paths.eval_csv)) {
        write_eval_file(r.eval, r.paths.eval_csv.string());
    }
    for (const char* name : metric_names()) {
        r.velocity.emplace_back(
            name, group_by_velocity(r.fit_table, fit_specs, r.fit_reports, name));
    }
    if (force || !fs::exists(r.paths.velocity_csv)) {
        write_velocity_file(r.velocity, r.paths.velocity_csv.string());
    }

    if (force || !fs::exists(r.paths.model_txt)) {
        write_model_file(fit_survivability_model(r.fit_reports, fit_specs),
                         r.paths.model_txt.string());
    }
    r.model = read_model_file(r.paths.model_txt.string());

    r.synth = synthesize_map(r.model, r.config.synth_target);
    if (force || !fs::exists(r.paths.synth_txt)) {
        detail::spill(r.paths.synth_txt,
                      detail::synth_summary_text(r.synth, r.config.synth_target));
    }
    if (force || !fs::exists(r.paths.synth_map)) {
        const MapSpec spec =
            to_map_spec(r.synth, "synth", mix_seed(r.config.base_seed, 0x51));
        write_map_file(expand(spec), r.paths.synth_map);
    }

    r.generalization = generalization_check(r.fit_reports, r.fit_table,
                                            r.holdout_reports, r.holdout_table);
    if (force || !fs::exists(r.paths.generalization_txt)) {
        detail::spill(r.paths.generalization_txt,
                      detail::generalization_text(r.generalization));
    }
    detail::note(log, "pipeline complete in " + out_dir.string());
    return r;
}

}  // namespace dynobench
