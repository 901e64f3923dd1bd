#pragma once

// Statistical post-processing for benchmark runs: rank correlation between
// map difficulty and planner success, per-difficulty-bin consistency scores,
// a linear difficulty model over map parameters, synthesis of map parameters
// that hit a target difficulty, and a holdout typicality check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynobench/harness.hpp"
#include "dynobench/metrics.hpp"
#include "dynobench/world.hpp"

namespace dynobench {

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Unbiased (n-1) standard deviation; 0 for fewer than two samples.
inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// 1-based ranks; tied values share the average of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j (0-based) tie; they share the mean of ranks i+1..j+1.
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

/// Spearman rank correlation: Pearson correlation of tie-averaged ranks.
/// Throws std::invalid_argument for mismatched lengths or fewer than three
/// samples, std::domain_error when either side is entirely tied (no rank
/// variance, so the correlation is undefined).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("spearman: sequences differ in length");
    if (x.size() < 3)
        throw std::invalid_argument("spearman: need at least 3 samples");
    const std::vector<double> rx = detail::average_ranks(x);
    const std::vector<double> ry = detail::average_ranks(y);
    const double mx = detail::mean_of(rx);
    const double my = detail::mean_of(ry);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw std::domain_error("spearman: a sequence has no rank variance");
    return sxy / std::sqrt(sxx * syy);
}

/// Unit difficulty bin for a preprocessed score in [0, 10]; the top bin
/// absorbs the maximum so scores of exactly 10 land in bin 9.
inline int difficulty_bin(double score) {
    int k = static_cast<int>(std::floor(score));
    if (k < 0) k = 0;
    if (k > 9) k = 9;
    return k;
}

struct SrccEntry {
    std::string planner;
    std::string gaze;
    double srcc{0.0};  // signed; the aggregate below uses magnitudes
};

struct CvCell {
    std::string planner;
    std::string gaze;
    int bin{0};  // unit difficulty bin, 0..9
    double cv{0.0};
    int maps{0};
};

struct EvaluationResult {
    std::string metric;
    std::vector<SrccEntry> srcc_per_planner;
    std::vector<CvCell> cv_per_group;
    // Aggregates over |srcc| and over the cv cells; NaN when no input survived
    // the validity rules (see warnings).
    double srcc_mean{std::numeric_limits<double>::quiet_NaN()};
    double srcc_std{std::numeric_limits<double>::quiet_NaN()};
    double cv_mean{std::numeric_limits<double>::quiet_NaN()};
    double cv_std{std::numeric_limits<double>::quiet_NaN()};
    std::vector<std::string> warnings;
};

/// Rank-correlates one preprocessed metric against per-(planner, gaze)
/// success rates and scores within-bin consistency. A planner/gaze pair whose
/// success rates (or difficulty scores) are entirely tied has no defined
/// correlation and is skipped with a warning; coefficients of variation are
/// computed per difficulty bin only where the bin holds at least two maps and
/// has a positive mean success rate.
inline EvaluationResult evaluate_metric(const SuccessTable& table,
                                        const std::vector<MetricReport>& reports,
                                        const std::string& metric) {
    EvaluationResult out;
    out.metric = metric;
    std::map<std::string, double> difficulty;
    for (const MetricReport& r : reports) {
        const auto it = r.preprocessed.find(metric);
        if (it != r.preprocessed.end()) difficulty[r.map_id] = it->second;
    }
    // Pairs in lexicographic order so the result does not depend on row order.
    std::set<std::pair<std::string, std::string>> pairs;
    for (const SuccessRow& row : table.rows) pairs.insert({row.planner, row.gaze});
    if (pairs.empty())
        throw std::invalid_argument("evaluate_metric: empty success table");

    std::vector<double> srcc_mags;
    std::vector<double> cvs;
    for (const auto& [planner, gaze] : pairs) {
        std::vector<double> xs;
        std::vector<double> ys;
        std::map<int, std::vector<double>> bins;
        for (const SuccessRow& row : table.rows) {
            if (row.planner != planner || row.gaze != gaze) continue;
            const auto it = difficulty.find(row.map_id);
            if (it == difficulty.end()) {
                throw std::invalid_argument("evaluate_metric: no preprocessed '" +
                                            metric + "' value for map " +
                                            row.map_id);
            }
            xs.push_back(it->second);
            ys.push_back(row.success_rate);
            bins[difficulty_bin(it->second)].push_back(row.success_rate);
        }
        try {
            const double rho = spearman(xs, ys);
            out.srcc_per_planner.push_back({planner, gaze, rho});
            srcc_mags.push_back(std::fabs(rho));
        } catch (const std::exception& e) {
            out.warnings.push_back(planner + "/" + gaze + ": srcc skipped (" +
                                   e.what() + ")");
        }
        for (const auto& [k, rates] : bins) {
            if (rates.size() < 2) continue;  // nothing to compare within the bin
            const double mu = detail::mean_of(rates);
            if (!(mu > 0.0)) {
                out.warnings.push_back(planner + "/" + gaze +
                                       ": cv skipped for difficulty bin " +
                                       std::to_string(k) +
                                       " (zero mean success rate)");
                continue;
            }
            const double cv = detail::sample_std(rates) / mu;
            out.cv_per_group.push_back(
                {planner, gaze, k, cv, static_cast<int>(rates.size())});
            cvs.push_back(cv);
        }
    }
    if (!srcc_mags.empty()) {
        out.srcc_mean = detail::mean_of(srcc_mags);
        out.srcc_std = detail::sample_std(srcc_mags);
    } else {
        out.warnings.push_back("no planner/gaze pair produced a defined srcc");
    }
    if (!cvs.empty()) {
        out.cv_mean = detail::mean_of(cvs);
        out.cv_std = detail::sample_std(cvs);
    } else {
        out.warnings.push_back("no difficulty bin held enough maps for a cv");
    }
    return out;
}

/// Evaluates every metric present in all reports, canonical names first.
inline std::vector<EvaluationResult> evaluate_all(
    const SuccessTable& table, const std::vector<MetricReport>& reports) {
    if (reports.empty())
        throw std::invalid_argument("evaluate_all: no metric reports");
    std::set<std::string> shared;
    for (const auto& [name, value] : reports.front().preprocessed) shared.insert(name);
    for (const MetricReport& r : reports) {
        for (auto it = shared.begin(); it != shared.end();) {
            it = r.preprocessed.count(*it) ? std::next(it) : shared.erase(it);
        }
    }
    std::vector<std::string> ordered;
    for (const std::string& name : metric_names()) {
        if (shared.erase(name)) ordered.push_back(name);
    }
    ordered.insert(ordered.end(), shared.begin(), shared.end());
    std::vector<EvaluationResult> out;
    out.reserve(ordered.size());
    for (const std::string& name : ordered) {
        out.push_back(evaluate_metric(table, reports, name));
    }
    return out;
}

struct VelocityGroupResult {
    double v_obs{0.0};
    int maps{0};
    EvaluationResult result;
};

/// Re-runs the evaluation inside groups of maps that share one obstacle
/// speed, so a metric can be judged with the speed effect held fixed. Groups
/// with fewer than three maps cannot be rank-correlated and are omitted.
/// Preprocessed scores are taken as-is (normalized once over the whole
/// dataset, not per group). Midpoints are snapped to 1e-6 m/s before
/// grouping so maps round-tripped through a text file still collate.
inline std::vector<VelocityGroupResult> group_by_velocity(
    const SuccessTable& table, const std::vector<MapSpec>& maps,
    const std::vector<MetricReport>& reports, const std::string& metric) {
    std::map<std::string, double> speed_of;
    for (const MapSpec& m : maps) {
        const double mid = 0.5 * (m.speed_min + m.speed_max);
        speed_of[m.id] = std::round(mid * 1e6) / 1e6;
    }
    std::map<double, std::set<std::string>> groups;
    for (const SuccessRow& row : table.rows) {
        const auto it = speed_of.find(row.map_id);
        if (it == speed_of.end())
            throw std::invalid_argument("group_by_velocity: unknown map " +
                                        row.map_id);
        groups[it->second].insert(row.map_id);
    }
    std::vector<VelocityGroupResult> out;
    for (const auto& [v, ids] : groups) {
        if (ids.size() < 3) continue;
        SuccessTable sub;
        for (const SuccessRow& row : table.rows) {
            if (ids.count(row.map_id)) sub.rows.push_back(row);
        }
        VelocityGroupResult g;
        g.v_obs = v;
        g.maps = static_cast<int>(ids.size());
        g.result = evaluate_metric(sub, reports, metric);
        out.push_back(std::move(g));
    }
    return out;
}

namespace detail {

/// Gauss-Jordan solve of a 4x4 augmented system with partial pivoting.
inline std::array<double, 4> solve4(std::array<std::array<double, 5>, 4> a) {
    double scale = 0.0;
    for (const auto& row : a) {
        for (int c = 0; c < 4; ++c) scale = std::max(scale, std::fabs(row[c]));
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        std::swap(a[piv], a[col]);
        if (std::fabs(a[col][col]) <= 1e-10 * scale) {
            throw std::runtime_error(
                "regression: design matrix is rank deficient (map parameters do "
                "not vary independently)");
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return {a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2],
            a[3][4] / a[3][3]};
}

}  // namespace detail

struct RegressionModel {
    // difficulty ~ c0 + c1 * n_obs + c2 * r_obs + c3 * v_obs
    std::array<double, 4> coefficients{};
    double residual_std{0.0};
    int samples{0};

    double predict(double n_obs, double r_obs, double v_obs) const {
        return coefficients[0] + coefficients[1] * n_obs +
               coefficients[2] * r_obs + coefficients[3] * v_obs;
    }

    std::string to_text() const {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "beta0 %.17g\nbeta1 %.17g\nbeta2 %.17g\nbeta3 %.17g\n"
                      "residual_std %.17g\nsamples %d\n",
                      coefficients[0], coefficients[1], coefficients[2],
                      coefficients[3], residual_std, samples);
        return buf;
    }

    static RegressionModel from_text(const std::string& text) {
        RegressionModel m;
        std::istringstream in(text);
        std::set<std::string> seen;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string key;
            double value = 0.0;
            if (!(ls >> key >> value))
                throw std::runtime_error("model text: bad line: " + line);
            if (key == "beta0") m.coefficients[0] = value;
            else if (key == "beta1") m.coefficients[1] = value;
            else if (key == "beta2") m.coefficients[2] = value;
            else if (key == "beta3") m.coefficients[3] = value;
            else if (key == "residual_std") m.residual_std = value;
            else if (key == "samples") m.samples = static_cast<int>(value);
            else throw std::runtime_error("model text: unknown key: " + key);
            seen.insert(key);
        }
        for (const char* k : {"beta0", "beta1", "beta2", "beta3"}) {
            if (!seen.count(k))
                throw std::runtime_error(std::string("model text: missing ") + k);
        }
        return m;
    }
};

inline void write_model_file(const RegressionModel& model, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << model.to_text();
}

inline RegressionModel read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return RegressionModel::from_text(text.str());
}

/// Ordinary least squares of a preprocessed score against (1, n, r, v) via
/// the 4x4 normal equations. Map radius/speed regressors use the midpoint of
/// the spec range (the range is a point for uniform datasets). Throws when a
/// report has no matching map or score, when fewer than four samples exist,
/// or when the parameters do not vary enough to identify the coefficients.
inline RegressionModel fit_survivability_model(
    const std::vector<MetricReport>& reports, const std::vector<MapSpec>& maps,
    const std::string& metric = "survivability") {
    std::map<std::string, const MapSpec*> by_id;
    for (const MapSpec& m : maps) by_id[m.id] = &m;
    std::vector<std::array<double, 4>> xs;
    std::vector<double> ys;
    for (const MetricReport& r : reports) {
        const auto mit = by_id.find(r.map_id);
        if (mit == by_id.end())
            throw std::invalid_argument("regression: no map spec for " + r.map_id);
        const auto vit = r.preprocessed.find(metric);
        if (vit == r.preprocessed.end())
            throw std::invalid_argument("regression: map " + r.map_id +
                                        " lacks preprocessed '" + metric + "'");
        const MapSpec& m = *mit->second;
        xs.push_back({1.0, static_cast<double>(m.n_obs),
                      0.5 * (m.size_min + m.size_max),
                      0.5 * (m.speed_min + m.speed_max)});
        ys.push_back(vit->second);
    }
    if (xs.size() < 4)
        throw std::invalid_argument("regression: need at least 4 samples");
    std::array<std::array<double, 5>, 4> a{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (int p = 0; p < 4; ++p) {
            for (int q = 0; q < 4; ++q) a[p][q] += xs[i][p] * xs[i][q];
            a[p][4] += xs[i][p] * ys[i];
        }
    }
    RegressionModel model;
    model.coefficients = detail::solve4(a);
    model.samples = static_cast<int>(xs.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = model.predict(xs[i][1], xs[i][2], xs[i][3]);
        ss += (ys[i] - pred) * (ys[i] - pred);
    }
    model.residual_std =
        xs.size() > 4 ? std::sqrt(ss / static_cast<double>(xs.size() - 4)) : 0.0;
    return model;
}

struct SynthesisResult {
    int n_obs{0};
    double r_obs{0.0};
    double v_obs{0.0};
    double predicted{0.0};
    double objective{0.0};  // |predicted - target|, snapped to 0 below 1e-9
};

/// Map parameters whose modeled difficulty comes closest to `target`, over
/// integer counts n in [10, 30], radii r in [0.5, 1.5], and speeds v in
/// [2, 6]. For each n the continuous subproblem is affine in (r, v): when the
/// target is reachable inside the box the exact preimage with the smallest
/// radius (then the smallest speed) is taken, otherwise the best corner.
/// Ties across counts resolve to the smallest n.
inline SynthesisResult synthesize_map(const RegressionModel& model, double target) {
    constexpr int kNLo = 10, kNHi = 30;
    constexpr double kRLo = 0.5, kRHi = 1.5;
    constexpr double kVLo = 2.0, kVHi = 6.0;
    const double b2 = model.coefficients[2];
    const double b3 = model.coefficients[3];
    std::optional<SynthesisResult> best;
    for (int n = kNLo; n <= kNHi; ++n) {
        const double c = model.coefficients[0] + model.coefficients[1] * n - target;
        // g(r, v) = c + b2 r + b3 v is affine, so its range over the box is
        // spanned by the corners.
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        for (double r : {kRLo, kRHi}) {
            for (double v : {kVLo, kVHi}) {
                const double g = c + b2 * r + b3 * v;
                g_min = std::min(g_min, g);
                g_max = std::max(g_max, g);
            }
        }
        double r_pick = kRLo;
        double v_pick = kVLo;
        double obj = 0.0;
        if (g_min <= 0.0 && 0.0 <= g_max) {
            if (b2 == 0.0 && b3 == 0.0) {
                // c itself is zero; any point works, take the smallest.
            } else if (b2 == 0.0) {
                v_pick = clamp(-c / b3, kVLo, kVHi);
            } else if (b3 == 0.0) {
                r_pick = clamp(-c / b2, kRLo, kRHi);
            } else {
                // Radii keeping the exact solution v(r) = -(c + b2 r)/b3
                // inside the speed range; prefer the smallest such radius.
                const double ra = -(c + b3 * kVLo) / b2;
                const double rb = -(c + b3 * kVHi) / b2;
                r_pick = clamp(std::min(ra, rb), kRLo, kRHi);
                v_pick = clamp(-(c + b2 * r_pick) / b3, kVLo, kVHi);
            }
            obj = std::fabs(c + b2 * r_pick + b3 * v_pick);
            if (obj < 1e-9) obj = 0.0;  // exact hit; ties then break on n
        } else {
            obj = std::numeric_limits<double>::infinity();
            for (double r : {kRLo, kRHi}) {
                for (double v : {kVLo, kVHi}) {
                    const double o = std::fabs(c + b2 * r + b3 * v);
                    if (o < obj) {  // strict: first minimum keeps small r, v
                        obj = o;
                        r_pick = r;
                        v_pick = v;
                    }
                }
            }
        }
        if (!best || obj < best->objective) {
            best = SynthesisResult{n, r_pick, v_pick,
                                   model.predict(n, r_pick, v_pick), obj};
        }
    }
    return *best;
}

/// A runnable constant-velocity map from synthesized parameters.
inline MapSpec to_map_spec(const SynthesisResult& s, const std::string& id,
                           std::uint64_t seed) {
    MapSpec m;
    m.id = id;
    m.n_obs = s.n_obs;
    m.size_min = m.size_max = s.r_obs;
    m.speed_min = m.speed_max = s.v_obs;
    m.profile = MotionProfile::cvm();
    m.seed = seed;
    m.dataset_tag = DatasetTag::Custom;
    return m;
}

struct GeneralizationResult {
    // Mean |success - bin mean| / bin std over evaluated holdout rows, and
    // the fraction of those rows within three bin standard deviations.
    double mean_sigma_distance{std::numeric_limits<double>::quiet_NaN()};
    double frac_within_3sigma{std::numeric_limits<double>::quiet_NaN()};
    int evaluated{0};
    int excluded{0};     // holdout rows whose difficulty bin had no usable stats
    int usable_bins{0};  // fit-set bins with >= 2 rows and positive spread
    int seen_bins{0};    // all difficulty bins present in the fit set
};

/// Scores how typical holdout success rates look next to the fit set:
/// fit-set rows are grouped into unit difficulty bins of one preprocessed
/// metric and summarized as per-bin Gaussians; each holdout row is measured
/// in bin standard deviations from the bin mean. Bins without at least two
/// fit rows or with zero spread cannot score anything and their holdout rows
/// count as excluded.
inline GeneralizationResult generalization_check(
    const std::vector<MetricReport>& fit_reports, const SuccessTable& fit_table,
    const std::vector<MetricReport>& holdout_reports,
    const SuccessTable& holdout_table,
    const std::string& metric = "survivability") {
    const auto difficulty_of = [&metric](const std::vector<MetricReport>& reports) {
        std::map<std::string, double> d;
        for (const MetricReport& r : reports) {
            const auto it = r.preprocessed.find(metric);
            if (it != r.preprocessed.end()) d[r.map_id] = it->second;
        }
        return d;
    };
    const auto fit_d = difficulty_of(fit_reports);
    const auto hold_d = difficulty_of(holdout_reports);

    std::map<int, std::vector<double>> bins;
    for (const SuccessRow& row : fit_table.rows) {
        const auto it = fit_d.find(row.map_id);
        if (it == fit_d.end())
            throw std::invalid_argument("generalization: no preprocessed '" +
                                        metric + "' for fit map " + row.map_id);
        bins[difficulty_bin(it->second)].push_back(row.success_rate);
    }
    struct BinStats {
        double mu;
        double sigma;
    };
    std::map<int, BinStats> usable;
    for (const auto& [k, rates] : bins) {
        if (rates.size() < 2) continue;
        const double sigma = detail::sample_std(rates);
        if (!(sigma > 0.0)) continue;
        usable[k] = {detail::mean_of(rates), sigma};
    }
    GeneralizationResult out;
    out.seen_bins = static_cast<int>(bins.size());
    out.usable_bins = static_cast<int>(usable.size());
    double total = 0.0;
    int within = 0;
    for (const SuccessRow& row : holdout_table.rows) {
        const auto it = hold_d.find(row.map_id);
        if (it == hold_d.end())
            throw std::invalid_argument("generalization: no preprocessed '" +
                                        metric + "' for holdout map " +
                                        row.map_id);
        const auto st = usable.find(difficulty_bin(it->second));
        if (st == usable.end()) {
            ++out.excluded;
            continue;
        }
        const double d =
            std::fabs(row.success_rate - st->second.mu) / st->second.sigma;
        total += d;
        if (d <= 3.0) ++within;
        ++out.evaluated;
    }
    if (out.evaluated > 0) {
        out.mean_sigma_distance = total / out.evaluated;
        out.frac_within_3sigma = static_cast<double>(within) / out.evaluated;
    }
    return out;
}

namespace detail {

inline std::string format_or_blank(double v) {
    return std::isnan(v) ? std::string() : format_number(v);
}

}  // namespace detail

/// Evaluation table as CSV. One row per (metric, planner, gaze) with the
/// signed correlation and that pair's mean cv; then two summary rows per
/// metric carrying the magnitude aggregates:
///   <metric>,summary,mean,<srcc_mean>,<cv_mean>
///   <metric>,summary,std,<srcc_std>,<cv_std>
/// Undefined values are left blank.
inline void write_eval_csv(const std::vector<EvaluationResult>& results,
                           std::ostream& os) {
    os << "metric,planner,gaze,srcc,cv_mean\n";
    for (const EvaluationResult& res : results) {
        // A pair can appear with a defined cv but skipped srcc (constant
        // success rates), so rows cover the union of both lists.
        std::vector<std::pair<std::string, std::string>> pair_rows;
        const auto seen = [&pair_rows](const std::string& p, const std::string& g) {
            for (const auto& [pp, gg] : pair_rows) {
                if (pp == p && gg == g) return true;
            }
            return false;
        };
        for (const SrccEntry& e : res.srcc_per_planner) {
            if (!seen(e.planner, e.gaze)) pair_rows.push_back({e.planner, e.gaze});
        }
        for (const CvCell& c : res.cv_per_group) {
            if (!seen(c.planner, c.gaze)) pair_rows.push_back({c.planner, c.gaze});
        }
        std::sort(pair_rows.begin(), pair_rows.end());
        for (const auto& [planner, gaze] : pair_rows) {
            std::string srcc_text;
            for (const SrccEntry& e : res.srcc_per_planner) {
                if (e.planner == planner && e.gaze == gaze) {
                    srcc_text = detail::format_number(e.srcc);
                    break;
                }
            }
            std::vector<double> pair_cvs;
            for (const CvCell& c : res.cv_per_group) {
                if (c.planner == planner && c.gaze == gaze) pair_cvs.push_back(c.cv);
            }
            os << res.metric << ',' << planner << ',' << gaze << ',' << srcc_text
               << ',';
            if (!pair_cvs.empty()) os << detail::format_number(detail::mean_of(pair_cvs));
            os << '\n';
        }
        os << res.metric << ",summary,mean," << detail::format_or_blank(res.srcc_mean)
           << ',' << detail::format_or_blank(res.cv_mean) << '\n';
        os << res.metric << ",summary,std," << detail::format_or_blank(res.srcc_std)
           << ',' << detail::format_or_blank(res.cv_std) << '\n';
    }
}

inline void write_eval_file(const std::vector<EvaluationResult>& results,
                            const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_eval_csv(results, os);
}

/// Velocity-grouped evaluation as CSV: one row per (metric, speed group)
/// with the group's map count and magnitude aggregates. Undefined values
/// are left blank.
inline void write_velocity_csv(
    const std::vector<std::pair<std::string, std::vector<VelocityGroupResult>>>&
        grouped,
    std::ostream& os) {
    os << "metric,v_obs,maps,srcc_mean,cv_mean\n";
    for (const auto& [metric, groups] : grouped) {
        for (const VelocityGroupResult& g : groups) {
            os << metric << ',' << detail::format_number(g.v_obs) << ',' << g.maps
               << ',' << detail::format_or_blank(g.result.srcc_mean) << ','
               << detail::format_or_blank(g.result.cv_mean) << '\n';
        }
    }
}

inline void write_velocity_file(
    const std::vector<std::pair<std::string, std::vector<VelocityGroupResult>>>&
        grouped,
    const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_velocity_csv(grouped, os);
}

}  // namespace dynobench
