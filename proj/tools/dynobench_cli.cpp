// dynobench command-line front end.
//
// Every pipeline stage is exposed as a subcommand so artifacts can be built,
// inspected, and rebuilt independently:
//
//   gen-maps   write a benchmark or held-out map family to a directory
//   run        execute the trial matrix over a map directory
//   metrics    score maps (or one external trajectory log) on the six metrics
//   analyze    correlate planner success with metric scores
//   fit        regress difficulty against map generation parameters
//   synth-map  invert the fitted model into a concrete map file
//   reproduce  run the whole pipeline end to end and self-validate it
//
// Exit codes: 0 success, 1 stage failure, 2 bad flags or configuration.

#include <CLI11.hpp>

#include <dynobench/acceptance.hpp>
#include <dynobench/analysis.hpp>
#include <dynobench/config.hpp>
#include <dynobench/harness.hpp>
#include <dynobench/map_io.hpp>
#include <dynobench/metrics.hpp>
#include <dynobench/pipeline.hpp>
#include <dynobench/world.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace dynobench;

namespace {

// ---------------------------------------------------------------------------
// Shared option state. CLI11 binds into these structs during parse; the
// handlers below read them afterwards.

struct GlobalOpts {
    std::string config_path;
    int jobs = 0;            // 0 = not supplied
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool jobs_set = false;
};

// Resolve the effective configuration: compiled defaults, then the config
// file if one was named, then explicit command-line overrides.
RunConfig resolve_config(const GlobalOpts& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = load_run_config(g.config_path);
    if (g.jobs_set) cfg.jobs = g.jobs;
    if (g.seed_set) cfg.base_seed = g.seed;
    cfg.validate();
    return cfg;
}

std::vector<MapSpec> specs_of(const std::vector<World>& worlds) {
    std::vector<MapSpec> specs;
    specs.reserve(worlds.size());
    for (const World& w : worlds) specs.push_back(w.spec);
    return specs;
}

// ---------------------------------------------------------------------------
// gen-maps

struct GenMapsOpts {
    std::string dataset;
    std::string out_dir;
    int seeds = 0;  // 0 = use config default for the family
    bool force = false;
};

int cmd_gen_maps(const RunConfig& cfg, const GenMapsOpts& o) {
    std::vector<MapSpec> specs;
    if (o.dataset == "I") {
        DatasetIParams params;
        params.seeds_per_cell = o.seeds > 0 ? o.seeds : cfg.seeds_per_cell;
        specs = generate_dataset_I(params, cfg.base_seed);
    } else if (o.dataset == "IIa" || o.dataset == "IIb" || o.dataset == "IIc") {
        const DatasetIIType type = o.dataset == "IIa"   ? DatasetIIType::a
                                   : o.dataset == "IIb" ? DatasetIIType::b
                                                        : DatasetIIType::c;
        const int count = o.seeds > 0 ? o.seeds : cfg.dataset2_per_type;
        specs = generate_dataset_II(type, count, cfg.base_seed);
    } else {
        throw std::invalid_argument("unknown dataset '" + o.dataset +
                                    "' (expected I, IIa, IIb, or IIc)");
    }
    const std::vector<World> worlds =
        ensure_maps(o.out_dir, std::move(specs), o.force);
    std::cout << "gen-maps: " << worlds.size() << " map files in " << o.out_dir
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunOpts {
    std::string maps_dir;
    std::vector<std::string> planners{"global-primitive", "mpc",
                                      "local-primitive"};
    std::vector<std::string> gazes{"full-range", "look-ahead"};
    std::string out_path;
    std::string success_path;  // optional extra artifact
};

int cmd_run(const RunConfig& cfg, const RunOpts& o) {
    // Vet the planner and gaze names before any expensive work so a typo
    // fails fast as a configuration error.
    for (const std::string& p : o.planners) make_planner(p);
    for (const std::string& g : o.gazes) gaze_from_id(g);

    const std::vector<World> worlds = load_map_dir(o.maps_dir);
    if (worlds.empty()) {
        throw std::invalid_argument("no .map files in " + o.maps_dir);
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const std::string& p : o.planners) {
        for (const std::string& g : o.gazes) pairs.emplace_back(p, g);
    }

    const MatrixResult res =
        run_matrix(worlds, pairs, cfg.robot(), cfg.jobs, {}, cfg.time_limit,
                   cfg.grid_resolution);
    if (!res.errors.empty()) {
        throw std::runtime_error("run: " + std::to_string(res.errors.size()) +
                                 " trials failed, first: " + res.errors.front());
    }
    write_results_file(res.records, o.out_path);
    if (!o.success_path.empty()) write_success_file(res.table, o.success_path);

    std::size_t successes = 0;
    for (const TrialRecord& r : res.records) {
        successes += r.outcome == TrialOutcome::Success ? 1 : 0;
    }
    std::cout << "run: " << res.records.size() << " trials over "
              << worlds.size() << " maps x " << pairs.size()
              << " planner/gaze pairs, " << successes << " successes -> "
              << o.out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsOpts {
    std::string maps_dir;
    std::string replay_path;
    std::string out_path;
    std::string norm_out;    // where to write the fitted scaling (map mode)
    std::string apply_norm;  // project through an existing scaling instead
    std::string map_id = "replay";
    double width = 50.0;
    double height = 50.0;
    double d_sample = 0.0;  // 0 = keep config value
    double t_max = 0.0;
};

int cmd_metrics(RunConfig cfg, const MetricsOpts& o) {
    if (o.maps_dir.empty() == o.replay_path.empty()) {
        throw std::invalid_argument(
            "metrics: exactly one of --maps or --replay is required");
    }
    if (o.d_sample > 0.0) cfg.d_sample = o.d_sample;
    if (o.t_max > 0.0) cfg.t_max = o.t_max;
    cfg.validate();

    std::vector<MetricReport> reports;
    if (!o.maps_dir.empty()) {
        for (const World& w : load_map_dir(o.maps_dir)) {
            reports.push_back(metric_report_for(w, cfg));
        }
        if (reports.empty()) {
            throw std::invalid_argument("no .map files in " + o.maps_dir);
        }
    } else {
        // External trajectory log: one report from per-tick t,id,x,y,r rows.
        const ReplayLog log =
            ReplayLog::parse_csv_file(o.replay_path, o.width, o.height);
        const SampleLattice lat = lattice_for(cfg, o.width, o.height);
        reports.push_back(
            compute_metrics(log, o.map_id, lat, cfg.t_max, cfg.robot()));
    }

    if (!o.apply_norm.empty()) {
        const Normalization norm =
            Normalization::from_json(detail::slurp(o.apply_norm));
        for (MetricReport& r : reports) apply_normalization(norm, r);
    } else if (!o.maps_dir.empty()) {
        const Normalization norm = preprocess(reports);
        const fs::path norm_path =
            o.norm_out.empty()
                ? fs::path(o.out_path).parent_path() / "normalization.json"
                : fs::path(o.norm_out);
        detail::spill(norm_path, norm.to_json());
        std::cout << "metrics: scaling ranges -> " << norm_path.string() << '\n';
    }
    // A lone replay log has no dataset to scale against; without --apply-norm
    // its report keeps raw values only.

    write_metrics_csv(o.out_path, reports);
    std::cout << "metrics: " << reports.size() << " report"
              << (reports.size() == 1 ? "" : "s") << " -> " << o.out_path
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOpts {
    std::string results_path;
    std::string metrics_path;
    std::string maps_dir;  // needed only for --group-by velocity
    std::string out_path;
    std::string group_by;
};

int cmd_analyze(const RunConfig&, const AnalyzeOpts& o) {
    const std::vector<TrialRecord> records = read_results_file(o.results_path);
    const SuccessTable table = success_table_from_records(records);
    const std::vector<MetricReport> reports =
        read_metrics_csv_file(o.metrics_path);
    const std::vector<EvaluationResult> eval = evaluate_all(table, reports);

    if (o.group_by.empty()) {
        write_eval_file(eval, o.out_path);
        std::cout << "analyze: " << eval.size() << " metrics over "
                  << table.rows.size() << " rows -> " << o.out_path << '\n';
        return 0;
    }
    if (o.group_by != "velocity") {
        throw std::invalid_argument("unknown --group-by '" + o.group_by +
                                    "' (expected velocity)");
    }
    if (o.maps_dir.empty()) {
        throw std::invalid_argument(
            "--group-by velocity needs --maps to recover obstacle speeds");
    }
    const std::vector<MapSpec> specs = specs_of(load_map_dir(o.maps_dir));
    std::vector<std::pair<std::string, std::vector<VelocityGroupResult>>>
        grouped;
    for (const EvaluationResult& ev : eval) {
        grouped.emplace_back(ev.metric,
                             group_by_velocity(table, specs, reports, ev.metric));
    }
    write_velocity_file(grouped, o.out_path);
    std::cout << "analyze: " << grouped.size()
              << " metrics split by obstacle speed -> " << o.out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
    std::string metrics_path;
    std::string maps_dir;
    std::string out_path;
};

int cmd_fit(const RunConfig&, const FitOpts& o) {
    const std::vector<MetricReport> reports =
        read_metrics_csv_file(o.metrics_path);
    const std::vector<MapSpec> specs = specs_of(load_map_dir(o.maps_dir));
    const RegressionModel model = fit_survivability_model(reports, specs);
    write_model_file(model, o.out_path);
    const auto& c = model.coefficients;
    std::cout << "fit: score = " << c[0] << " + " << c[1] << "*n + " << c[2]
              << "*r + " << c[3] << "*v  (residual std " << model.residual_std
              << ", " << model.samples << " maps) -> " << o.out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// synth-map

struct SynthOpts {
    std::string model_path;
    double target = 5.0;
    std::string out_path;
    std::string map_id = "synth";
};

int cmd_synth_map(const RunConfig& cfg, const SynthOpts& o) {
    const RegressionModel model = read_model_file(o.model_path);
    const SynthesisResult s = synthesize_map(model, o.target);
    const MapSpec spec = to_map_spec(s, o.map_id, mix_seed(cfg.base_seed, 0x51));
    write_map_file(expand(spec), o.out_path);
    std::cout << "synth-map: n=" << s.n_obs << " r=" << s.r_obs
              << " v=" << s.v_obs << " predicted=" << s.predicted
              << " (target " << o.target << ", residual " << s.objective
              << ") -> " << o.out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceOpts {
    std::string scale = "desk";
    std::string out_dir = "reproduction";
    bool force = false;
};

int cmd_reproduce(const RunConfig& cfg, const ReproduceOpts& o) {
    const Scale scale = scale_from_string(o.scale);
    const ReproduceResult r =
        reproduce(cfg, scale, o.out_dir, o.force, &std::cout);

    const fs::path work = fs::path(o.out_dir) / "self-check";
    const std::vector<CriterionCheck> checks =
        acceptance_criteria(r, work, &std::cout);

    std::cout << '\n';
    write_acceptance_report(checks, std::cout);
    std::ofstream report(r.paths.acceptance_txt);
    if (!report) {
        throw std::runtime_error("cannot open for writing: " +
                                 r.paths.acceptance_txt.string());
    }
    write_acceptance_report(checks, report);
    std::cout << "report -> " << r.paths.acceptance_txt.string() << '\n';

    if (!all_passed(checks)) {
        std::cerr << "reproduce: self-check failed, see report above\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "dynobench: difficulty metrics and planner benchmarks for 2D worlds "
        "of moving disc obstacles"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path,
                   "flat key-value configuration file (flags override it)")
        ->check(CLI::ExistingFile);
    app.add_option("--jobs", g.jobs, "worker threads for trial stages")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "base seed for every generated artifact");

    GenMapsOpts gen;
    CLI::App* gen_cmd =
        app.add_subcommand("gen-maps", "write a map family to a directory");
    gen_cmd->add_option("--dataset", gen.dataset,
                        "family: I (uniform grid) or IIa/IIb/IIc (mixed "
                        "speeds / mixed radii / reciprocal avoidance)")
        ->required();
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
    gen_cmd->add_option("--seeds", gen.seeds,
                        "draws per parameter cell (I) or maps (IIa/b/c)")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_flag("--force", gen.force,
                      "clear the directory and regenerate everything");

    RunOpts run;
    CLI::App* run_cmd =
        app.add_subcommand("run", "execute the trial matrix over a map set");
    run_cmd->add_option("--maps", run.maps_dir, "directory of .map files")
        ->required();
    run_cmd->add_option("--planners", run.planners,
                        "planner names (global-primitive, mpc, "
                        "local-primitive)")
        ->delimiter(',');
    run_cmd->add_option("--gazes", run.gazes,
                        "gaze policies (full-range, look-ahead, look-goal, "
                        "rotating, finean, owl)")
        ->delimiter(',');
    run_cmd->add_option("--out", run.out_path, "per-trial results CSV")
        ->required();
    run_cmd->add_option("--success", run.success_path,
                        "also write the folded per-map success table here");

    MetricsOpts met;
    CLI::App* met_cmd = app.add_subcommand(
        "metrics", "score maps or one trajectory log on the six metrics");
    met_cmd->add_option("--maps", met.maps_dir, "directory of .map files");
    met_cmd->add_option("--replay", met.replay_path,
                        "trajectory log CSV of t,id,x,y,r rows (instead of "
                        "--maps)");
    met_cmd->add_option("--out", met.out_path, "metric report CSV")->required();
    met_cmd->add_option("--d-sample", met.d_sample,
                        "metres between sample positions")
        ->check(CLI::PositiveNumber);
    met_cmd->add_option("--t-max", met.t_max, "survival horizon cap, seconds")
        ->check(CLI::PositiveNumber);
    met_cmd->add_option("--norm-out", met.norm_out,
                        "where to write the fitted scaling ranges "
                        "(default: normalization.json beside --out)");
    met_cmd->add_option("--apply-norm", met.apply_norm,
                        "project through existing scaling ranges instead of "
                        "fitting new ones")
        ->check(CLI::ExistingFile);
    met_cmd->add_option("--map-id", met.map_id,
                        "report id for --replay input");
    met_cmd->add_option("--width", met.width, "--replay world width, metres")
        ->check(CLI::PositiveNumber);
    met_cmd->add_option("--height", met.height, "--replay world height, metres")
        ->check(CLI::PositiveNumber);

    AnalyzeOpts ana;
    CLI::App* ana_cmd = app.add_subcommand(
        "analyze", "correlate planner success with metric scores");
    ana_cmd->add_option("--results", ana.results_path, "per-trial results CSV")
        ->required();
    ana_cmd->add_option("--metrics", ana.metrics_path, "metric report CSV")
        ->required();
    ana_cmd->add_option("--out", ana.out_path, "evaluation CSV")->required();
    ana_cmd->add_option("--group-by", ana.group_by,
                        "split the correlation by a map property (velocity)");
    ana_cmd->add_option("--maps", ana.maps_dir,
                        "map directory, required with --group-by velocity");

    FitOpts fit;
    CLI::App* fit_cmd = app.add_subcommand(
        "fit", "regress difficulty against map generation parameters");
    fit_cmd->add_option("--metrics", fit.metrics_path, "metric report CSV")
        ->required();
    fit_cmd->add_option("--maps", fit.maps_dir, "directory of .map files")
        ->required();
    fit_cmd->add_option("--out", fit.out_path, "model coefficients file")
        ->required();

    SynthOpts syn;
    CLI::App* syn_cmd = app.add_subcommand(
        "synth-map", "invert a fitted model into a concrete map file");
    syn_cmd->add_option("--model", syn.model_path, "model coefficients file")
        ->required()
        ->check(CLI::ExistingFile);
    syn_cmd->add_option("--target", syn.target, "difficulty score to hit")
        ->required();
    syn_cmd->add_option("--out", syn.out_path, "output map file")->required();
    syn_cmd->add_option("--id", syn.map_id, "id written into the map file");

    ReproduceOpts rep;
    CLI::App* rep_cmd = app.add_subcommand(
        "reproduce",
        "run the full pipeline end to end, self-validate, emit a report");
    rep_cmd->add_option("--scale", rep.scale,
                        "desk (full benchmark) or micro (smoke subset)");
    rep_cmd->add_option("--out", rep.out_dir, "artifact directory");
    rep_cmd->add_flag("--force", rep.force,
                      "recompute every stage even if its artifact exists");

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();
    g.jobs_set = false;
    g.seed_set = false;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    g.jobs_set = app.count("--jobs") > 0;
    g.seed_set = app.count("--seed") > 0;

    try {
        const RunConfig cfg = resolve_config(g);
        if (gen_cmd->parsed()) return cmd_gen_maps(cfg, gen);
        if (run_cmd->parsed()) return cmd_run(cfg, run);
        if (met_cmd->parsed()) return cmd_metrics(cfg, met);
        if (ana_cmd->parsed()) return cmd_analyze(cfg, ana);
        if (fit_cmd->parsed()) return cmd_fit(cfg, fit);
        if (syn_cmd->parsed()) return cmd_synth_map(cfg, syn);
        if (rep_cmd->parsed()) return cmd_reproduce(cfg, rep);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
