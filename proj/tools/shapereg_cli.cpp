// Command-line front end: fit/predict round trips, bound evaluation,
// experiment execution and verification suites.
//
// Exit codes: 0 success, 1 I/O error, 2 config/schema error, 3 domain
// infeasibility (bad hyperparameters, dimension mismatch, out-of-range
// arguments), 4 verification check failed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shapereg/bounds.hpp"
#include "shapereg/config.hpp"
#include "shapereg/csv.hpp"
#include "shapereg/estimators.hpp"
#include "shapereg/experiments.hpp"
#include "shapereg/model_json.hpp"
#include "shapereg/shape.hpp"

namespace sr = shapereg;
using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw sr::ConfigError("malformed JSON in " + what);
    return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw sr::ConfigError("bad numeric field '" + s + "' in " + what);
    }
}

/// Reads a sample CSV with header x1..xd,y.
sr::Dataset read_data_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw sr::ConfigError("empty data file " + path);
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "y")
        throw sr::ConfigError("data CSV must have header x1,...,xd,y");
    const int d = static_cast<int>(header.size()) - 1;
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (static_cast<int>(f.size()) != d + 1)
            throw sr::ConfigError("data CSV row width mismatch");
        for (int k = 0; k < d; ++k) xs.push_back(parse_number(f[k], path));
        ys.push_back(parse_number(f[d], path));
    }
    return sr::Dataset(std::move(xs), std::move(ys), d);
}

/// Reads a query CSV with header x1..xd.
std::pair<std::vector<double>, int> read_points_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw sr::ConfigError("empty points file " + path);
    const auto header = split_csv_line(line);
    const int d = static_cast<int>(header.size());
    std::vector<double> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (static_cast<int>(f.size()) != d)
            throw sr::ConfigError("points CSV row width mismatch");
        for (int k = 0; k < d; ++k) pts.push_back(parse_number(f[k], path));
    }
    return {std::move(pts), d};
}

// -------------------------------------------------------------------------
// fit / predict
// -------------------------------------------------------------------------

int cmd_fit(const std::string& config_path, const std::string& data_path,
            const std::string& out_path) {
    const sr::Config cfg = sr::config_from_json(parse_json(read_file(config_path), config_path));
    if (!cfg.has_method) throw sr::ConfigError("fit: config needs a method section");
    sr::Dataset data;
    if (!data_path.empty()) {
        data = read_data_csv(data_path);
    } else {
        if (!cfg.has_problem) throw sr::ConfigError("fit: config needs a problem section or --data");
        data = sr::generate(cfg.problem, cfg.experiment.n,
                            sr::derive_seed(cfg.experiment.seed, cfg.experiment.n, 0,
                                            sr::role::data));
    }
    sr::MethodSpec method = cfg.method;
    if (!method.prototype_law_set && cfg.has_problem)
        method.prototype_law = {cfg.problem.x_law, cfg.problem.x_law_param};
    sr::ResolvedFit fit = sr::fit_method(method, data, cfg.experiment.delta,
                                         sr::derive_seed(cfg.experiment.seed, data.n(), 0,
                                                         sr::role::fit));
    write_file(out_path, sr::model_to_json(fit.model).dump(2) + "\n");
    std::cout << "fitted " << sr::method_name(fit.model.method) << " with " << fit.params
              << " on n=" << data.n() << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& points_path,
                const std::string& out_path) {
    const sr::LocalModel model =
        sr::model_from_json(parse_json(read_file(model_path), model_path));
    auto [pts, d] = read_points_csv(points_path);
    if (d != model.d) throw std::invalid_argument("predict: points dimension mismatch");
    std::string out;
    for (int k = 0; k < d; ++k) out += "x" + std::to_string(k + 1) + ",";
    out += "yhat,flag\n";
    const std::size_t n = pts.size() / static_cast<std::size_t>(d);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> x{pts.data() + i * d, static_cast<std::size_t>(d)};
        bool inside = true;
        for (double v : x)
            if (v < 0.0 || v > 1.0) inside = false;
        for (double v : x) {
            out += sr::format_double(v);
            out += ',';
        }
        out += sr::format_double(model.predict(x));
        out += ',';
        if (!inside) out += "outside_domain";
        out += '\n';
    }
    write_file(out_path, out);
    return 0;
}

// -------------------------------------------------------------------------
// experiment
// -------------------------------------------------------------------------

json per_n_summary(const std::vector<sr::TrialRecord>& records) {
    json arr = json::array();
    std::vector<std::size_t> ns;
    for (const auto& r : records)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    std::sort(ns.begin(), ns.end());
    for (std::size_t n : ns) {
        std::vector<double> errs;
        std::size_t skipped = 0;
        for (const auto& r : records)
            if (r.n == n) {
                if (r.skipped) ++skipped;
                else errs.push_back(r.error);
            }
        json e;
        e["n"] = n;
        e["count"] = errs.size();
        e["skipped"] = skipped;
        if (!errs.empty()) {
            std::sort(errs.begin(), errs.end());
            double mean = 0;
            for (double v : errs) mean += v;
            mean /= errs.size();
            auto q = [&](double p) {
                const double idx = p * (errs.size() - 1);
                const std::size_t lo = static_cast<std::size_t>(idx);
                const std::size_t hi = std::min(lo + 1, errs.size() - 1);
                return errs[lo] + (errs[hi] - errs[lo]) * (idx - lo);
            };
            e["mean"] = mean;
            e["median"] = q(0.5);
            e["q10"] = q(0.1);
            e["q90"] = q(0.9);
        }
        arr.push_back(e);
    }
    return arr;
}

json rate_fit_to_json(const sr::RateFit& rf) {
    json j;
    j["valid"] = rf.valid;
    j["slope"] = rf.slope;
    j["intercept"] = rf.intercept;
    j["r2"] = rf.r2;
    j["slope_stderr"] = rf.slope_stderr;
    j["n_points"] = rf.n_points;
    j["dropped_burn_in"] = rf.dropped_burn_in;
    if (!rf.note.empty()) j["note"] = rf.note;
    return j;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir) {
    const sr::Config cfg = sr::config_from_json(parse_json(read_file(config_path), config_path));
    const auto& e = cfg.experiment;
    std::filesystem::create_directories(out_dir);
    json summary;
    summary["schema"] = 1;
    summary["kind"] = e.kind;
    std::string records_csv;

    if (e.kind == "rate") {
        if (!cfg.has_problem || !cfg.has_method)
            throw sr::ConfigError("rate experiment needs problem and method sections");
        sr::ExperimentConfig xc;
        xc.problem = cfg.problem;
        xc.method = cfg.method;
        xc.n_grid = e.n_grid;
        xc.replicates = e.replicates;
        xc.eval = e.eval;
        xc.seed = e.seed;
        xc.delta = e.delta;
        const auto records = sr::run_error_experiment(xc);
        records_csv = sr::records_to_csv(records, cfg.output.timing);
        summary["per_n"] = per_n_summary(records);
        summary["rate_fit"] = rate_fit_to_json(sr::fit_rate(records, cfg.problem));
    } else if (e.kind == "verify_variance") {
        if (!cfg.has_problem) throw sr::ConfigError("verify_variance needs a problem section");
        std::vector<double> one;
        for (int i = 1; i < e.cells_per_dim; ++i)
            one.push_back(static_cast<double>(i) / e.cells_per_dim);
        const auto res = sr::verify_variance_bound(
            std::vector<std::vector<double>>(cfg.problem.d, one), cfg.problem, e.n, e.delta,
            e.replicates, e.seed);
        summary["verdicts"] = {{"within_delta", res.violation_freq <= e.delta}};
        summary["violation_freq"] = res.violation_freq;
        summary["bound"] = res.bound;
        records_csv = "violation_freq,bound,replicates\n" + sr::format_double(res.violation_freq) +
                      "," + sr::format_double(res.bound) + "," + std::to_string(e.replicates) +
                      "\n";
    } else if (e.kind == "verify_volume_invariance") {
        const auto res = sr::verify_volume_invariance(
            e.tree == "centered" ? sr::PrtKind::Centered : sr::PrtKind::Uniform, e.n_splits,
            e.d, e.replicates, e.seed);
        summary["verdicts"] = {{"identity_holds", res.max_rel_error <= 1e-12},
                               {"centered_exact", res.centered_exact}};
        summary["max_rel_error"] = res.max_rel_error;
        records_csv = "max_rel_error\n" + sr::format_double(res.max_rel_error) + "\n";
    } else if (e.kind == "verify_aspect") {
        const auto res = sr::verify_aspect_lower_bound(
            e.tree == "centered" ? sr::PrtKind::Centered : sr::PrtKind::Uniform, e.n_splits,
            e.d, e.replicates, e.seed);
        summary["verdicts"] = {{"above_prob_floor",
                                res.empirical_prob >= res.prob_floor - 3.0 * res.std_err}};
        summary["empirical_prob"] = res.empirical_prob;
        summary["threshold"] = res.threshold;
        summary["prob_floor"] = res.prob_floor;
        records_csv = "empirical_prob,threshold,prob_floor\n" +
                      sr::format_double(res.empirical_prob) + "," +
                      sr::format_double(res.threshold) + "," +
                      sr::format_double(res.prob_floor) + "\n";
    } else if (e.kind == "verify_prt_tail") {
        const auto res =
            sr::verify_prt_diam_vol(sr::prt_tail_kind_from_name(e.tail_kind), e.n_splits, e.d,
                                    e.replicates, e.seed, e.parameter);
        summary["verdicts"] = {{"within_bound",
                                res.empirical_tail <= res.bound_tail + 3.0 * res.std_err}};
        summary["empirical_tail"] = res.empirical_tail;
        summary["bound_tail"] = res.bound_tail;
        summary["threshold"] = res.threshold;
        records_csv = "empirical_tail,bound_tail,threshold\n" +
                      sr::format_double(res.empirical_tail) + "," +
                      sr::format_double(res.bound_tail) + "," +
                      sr::format_double(res.threshold) + "\n";
    } else if (e.kind == "counterexample") {
        const auto records = sr::run_counterexample(e.d, e.sigma, e.n_grid, e.replicates, e.seed);
        records_csv = sr::counterexample_to_csv(records);
        bool ordered = true;
        for (const auto& r : records) {
            if (r.schedule != "anisotropic") continue;
            if (!(r.rmse >= r.lower_bound)) ordered = false;
            for (const auto& iso : records)
                if (iso.schedule == "isotropic" && iso.n == r.n && !(r.rmse >= iso.rmse))
                    ordered = false;
        }
        summary["verdicts"] = {{"anisotropic_dominates", ordered}};
    } else if (e.kind == "verify_mondrian") {
        const auto res =
            sr::verify_mondrian_geometry(e.lifetime, e.d, e.delta, e.replicates, e.seed);
        summary["verdicts"] = {
            {"aspect_within_2delta",
             res.aspect_exceed_freq <= res.aspect_freq_bound + 3.0 * res.aspect_std_err},
            {"first_split_matches",
             std::abs(res.mean_first_split - res.expected_first_split) <=
                 3.0 * res.first_split_std_err},
            {"hminus_matches_oracle", res.hminus_cdf_gap <= 0.03}};
        summary["aspect_exceed_freq"] = res.aspect_exceed_freq;
        summary["aspect_threshold"] = res.aspect_threshold;
        summary["mean_first_split"] = res.mean_first_split;
        summary["hminus_cdf_gap"] = res.hminus_cdf_gap;
        records_csv = "aspect_exceed_freq,aspect_threshold,mean_first_split,hminus_cdf_gap\n" +
                      sr::format_double(res.aspect_exceed_freq) + "," +
                      sr::format_double(res.aspect_threshold) + "," +
                      sr::format_double(res.mean_first_split) + "," +
                      sr::format_double(res.hminus_cdf_gap) + "\n";
    } else {
        throw sr::ConfigError("unknown experiment kind '" + e.kind + "'");
    }

    write_file(out_dir + "/records.csv", records_csv);
    write_file(out_dir + "/summary.json", summary.dump(2) + "\n");
    std::cout << "wrote " << out_dir << "/records.csv and summary.json\n";
    return 0;
}

// -------------------------------------------------------------------------
// bound
// -------------------------------------------------------------------------

struct BoundArgs {
    double sigma2 = 1.0, n = 100, v = 1, delta = 0.1, pn = 0, lip = 0, diam = 0, ell = 1,
           vol = 0, k = 1, m = 1, beta = 2, b = 1, density_max = 1, cd = 1, t0 = 1, eta = 0.1,
           lifetime = 1, nmu = 1, gamma = 1, parameter = 0.5;
    int d = 1, n_splits = 8;
    std::string kind = "uniform_vol";
};

int cmd_bound(const std::string& name, const BoundArgs& a) {
    json out;
    json preds = json::object();
    if (name == "variance") {
        out["value"] = sr::variance_bound(a.sigma2, a.n, a.v, a.delta);
    } else if (name == "shattering") {
        const auto s = sr::shattering_bound(a.n, a.v);
        out["value"] = s.value;
        out["log_value"] = s.log_value;
    } else if (name == "pointwise_general") {
        out["value"] = sr::pointwise_bound_general(a.sigma2, a.n, a.v, a.delta, a.pn, a.lip, a.diam);
    } else if (name == "pointwise_mass") {
        out["value"] =
            sr::pointwise_bound_mass(a.sigma2, a.n, a.v, a.delta, a.ell, a.vol, a.lip, a.diam);
    } else if (name == "delta_n_large") {
        out["value"] = sr::delta_n_large_threshold(a.n, a.v, a.delta);
    } else if (name == "knn") {
        const auto r = sr::knn_bound(a.sigma2, a.n, a.d, a.delta, a.k, a.ell, a.lip, a.t0);
        out["value"] = r.value;
        preds["k_large_enough"] = r.k_large_enough;
        preds["k_small_enough"] = r.k_small_enough;
    } else if (name == "cart") {
        const auto r = sr::cart_bound(a.sigma2, a.n, a.d, a.delta, a.m, a.beta, a.b, a.lip);
        out["value"] = r.value;
        preds["m_large_enough"] = r.m_large_enough;
    } else if (name == "proto") {
        const auto r = sr::proto_bound(a.sigma2, a.n, a.m, a.d, a.delta, a.density_max, a.b,
                                       a.cd, a.lip, a.t0);
        out["value"] = r.value;
        preds["ratio_ok"] = r.ratio_ok;
        preds["m_large_enough"] = r.m_large_enough;
    } else if (name == "optinet") {
        const auto r =
            sr::optinet_bound(a.sigma2, a.n, a.m, a.d, a.delta, a.b, a.cd, a.eta, a.lip, a.t0);
        out["value"] = r.value;
        preds["m_large_enough"] = r.m_large_enough;
        preds["eta_small_enough"] = r.eta_small_enough;
        preds["n_large_enough"] = r.n_large_enough;
    } else if (name == "mondrian") {
        const auto r = sr::mondrian_bound(a.sigma2, a.n, a.d, a.delta, a.b, a.lifetime, a.lip);
        out["value"] = r.value;
        preds["n_large_enough"] = r.n_large_enough;
    } else if (name == "chernoff_lower") {
        out["value"] = sr::chernoff_lower(a.nmu, a.delta);
    } else if (name == "chernoff_upper") {
        out["value"] = sr::chernoff_upper(a.nmu, a.delta);
    } else if (name == "prt_tail") {
        const auto r = sr::prt_tail_bounds(sr::prt_tail_kind_from_name(a.kind), a.n_splits, a.d,
                                           a.parameter);
        out["value"] = r.tail;
        out["threshold"] = r.threshold;
        out["event"] = r.event_is_lower ? "below_threshold" : "above_threshold";
    } else if (name == "sr_rate") {
        const auto r =
            sr::sr_rate_bound(a.sigma2, a.ell, a.lip, a.gamma, a.d, a.n, a.v, a.delta);
        out["constant"] = r.constant;
        out["rate_factor"] = r.rate_factor;
        out["value"] = r.constant * r.rate_factor;
    } else {
        std::cerr << "unknown bound '" << name
                  << "'. valid names: variance shattering pointwise_general pointwise_mass "
                     "delta_n_large knn cart proto optinet mondrian chernoff_lower "
                     "chernoff_upper prt_tail sr_rate\n";
        return 2;
    }
    out["predicates"] = preds;
    std::cout << out.dump(2) << "\n";
    return 0;
}

// -------------------------------------------------------------------------
// verify
// -------------------------------------------------------------------------

bool report(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    return pass;
}

int cmd_verify(const std::string& which, int scale) {
    bool all = true;
    const bool everything = which == "all";
    if (everything || which == "volume") {
        for (int d : {1, 2, 3}) {
            const auto res =
                sr::verify_volume_invariance(sr::PrtKind::Uniform, 30, d, 1000 / scale + 10, 7);
            all &= report("volume_invariance_uniform_d" + std::to_string(d),
                          res.max_rel_error <= 1e-12,
                          "max_rel_error=" + sr::format_double(res.max_rel_error));
        }
        const auto cc = sr::verify_volume_invariance(sr::PrtKind::Centered, 30, 2, 200, 7);
        all &= report("volume_invariance_centered", cc.centered_exact && cc.max_rel_error == 0.0,
                      "exact 2^-N leaf volumes");
    }
    if (everything || which == "variance") {
        sr::RegressionProblem p;
        p.d = 1;
        p.noise_param = 1.0;
        const auto res = sr::verify_variance_bound({{0.25, 0.5, 0.75}}, p, 200, 0.1,
                                                   2000 / scale + 10, 11);
        all &= report("variance_bound", res.violation_freq <= 0.1,
                      "violation_freq=" + sr::format_double(res.violation_freq) +
                          " bound=" + sr::format_double(res.bound));
    }
    if (everything || which == "aspect") {
        const auto u =
            sr::verify_aspect_lower_bound(sr::PrtKind::Uniform, 64, 2, 10000 / scale + 20, 13);
        all &= report("uniform_not_shape_regular",
                      u.empirical_prob >= u.prob_floor - 3.0 * u.std_err,
                      "empirical=" + sr::format_double(u.empirical_prob) + " >= 1/11 - 3se");
        const auto c =
            sr::verify_aspect_lower_bound(sr::PrtKind::Centered, 64, 2, 10000 / scale + 20, 13);
        all &= report("centered_not_shape_regular",
                      c.empirical_prob >= c.prob_floor - 3.0 * c.std_err,
                      "empirical=" + sr::format_double(c.empirical_prob) + " >= 1/14 - 3se");
    }
    if (everything || which == "prt") {
        const struct {
            sr::PrtTailKind kind;
            double param;
            const char* name;
        } cases[] = {{sr::PrtTailKind::UniformDiamUp, 0.5, "uniform_diam_up"},
                     {sr::PrtTailKind::UniformDiamDown, 0.5, "uniform_diam_down"},
                     {sr::PrtTailKind::UniformVol, 2.0, "uniform_vol_lower"},
                     {sr::PrtTailKind::UniformVol, 0.5, "uniform_vol_upper"}};
        for (const auto& cse : cases) {
            const auto r =
                sr::verify_prt_diam_vol(cse.kind, 32, 2, 10000 / scale + 20, 17, cse.param);
            all &= report(std::string("prt_tail_") + cse.name,
                          r.empirical_tail <= r.bound_tail + 3.0 * r.std_err,
                          "empirical=" + sr::format_double(r.empirical_tail) +
                              " bound=" + sr::format_double(r.bound_tail));
        }
    }
    if (everything || which == "mondrian") {
        const int reps = 10000 / scale + 20;
        const auto r = sr::verify_mondrian_geometry(10.0, 2, 0.1, reps, 19);
        all &= report("mondrian_aspect",
                      r.aspect_exceed_freq <= r.aspect_freq_bound + 3.0 * r.aspect_std_err,
                      "freq=" + sr::format_double(r.aspect_exceed_freq) +
                          " <= 2delta=" + sr::format_double(r.aspect_freq_bound));
        all &= report("mondrian_first_split",
                      std::abs(r.mean_first_split - r.expected_first_split) <=
                          3.0 * r.first_split_std_err,
                      "mean=" + sr::format_double(r.mean_first_split) + " expect 1/d");
        // two-sample CDF noise grows as replicates shrink; 0.03 is the
        // full-scale figure
        const double gap_limit = std::max(0.03, 2.0 * std::sqrt(2.0 / reps));
        all &= report("mondrian_hminus_law", r.hminus_cdf_gap <= gap_limit,
                      "cdf_gap=" + sr::format_double(r.hminus_cdf_gap) +
                          " <= " + sr::format_double(gap_limit));
    }
    if (everything || which == "counterexample") {
        const auto recs =
            sr::run_counterexample(2, 1.0, {1024, 2048, 4096, 8192, 16384}, 200 / scale + 10, 23);
        bool ordered = true;
        for (const auto& r : recs) {
            if (r.schedule != "anisotropic") continue;
            if (!(r.rmse >= r.lower_bound)) ordered = false;
            for (const auto& iso : recs)
                if (iso.schedule == "isotropic" && iso.n == r.n && !(r.rmse >= iso.rmse))
                    ordered = false;
        }
        all &= report("counterexample_ordering", ordered,
                      "anisotropic RMSE above isotropic RMSE and analytic lower bound");
    }
    return all ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"local-averaging regression toolkit"};
    app.require_subcommand(1);

    std::string config_path, data_path, out_path, model_path, points_path, out_dir;

    auto* fit = app.add_subcommand("fit", "fit a model from a config (and optional data CSV)");
    fit->add_option("--config", config_path, "config JSON")->required();
    fit->add_option("--data", data_path, "training data CSV (header x1..xd,y)");
    fit->add_option("--out", out_path, "output model JSON")->required();

    auto* predict = app.add_subcommand("predict", "predict at query points");
    predict->add_option("--model", model_path, "model JSON")->required();
    predict->add_option("--points", points_path, "query CSV (header x1..xd)")->required();
    predict->add_option("--out", out_path, "output CSV")->required();

    auto* experiment = app.add_subcommand("experiment", "run an experiment config");
    experiment->add_option("--config", config_path, "config JSON")->required();
    experiment->add_option("--out-dir", out_dir, "output directory")->required();

    auto* bound = app.add_subcommand("bound", "evaluate a closed-form bound");
    std::string bound_name;
    BoundArgs ba;
    bound->add_option("name", bound_name, "bound name")->required();
    bound->add_option("--sigma2", ba.sigma2);
    bound->add_option("--n", ba.n);
    bound->add_option("--v", ba.v);
    bound->add_option("--delta", ba.delta);
    bound->add_option("--pn", ba.pn);
    bound->add_option("--lip", ba.lip);
    bound->add_option("--diam", ba.diam);
    bound->add_option("--ell", ba.ell);
    bound->add_option("--vol", ba.vol);
    bound->add_option("--k", ba.k);
    bound->add_option("--m", ba.m);
    bound->add_option("--beta", ba.beta);
    bound->add_option("--b", ba.b);
    bound->add_option("--density-max", ba.density_max);
    bound->add_option("--cd", ba.cd);
    bound->add_option("--t0", ba.t0);
    bound->add_option("--eta", ba.eta);
    bound->add_option("--lifetime", ba.lifetime);
    bound->add_option("--nmu", ba.nmu);
    bound->add_option("--gamma", ba.gamma);
    bound->add_option("--parameter", ba.parameter);
    bound->add_option("--d", ba.d);
    bound->add_option("--N", ba.n_splits);
    bound->add_option("--kind", ba.kind);

    auto* verify = app.add_subcommand("verify", "run verification checks");
    std::string which = "all";
    int scale = 1;
    verify->add_option("--which", which,
                       "all|volume|variance|aspect|prt|mondrian|counterexample");
    verify->add_option("--scale", scale, "divide replicate counts by this factor")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(config_path, data_path, out_path);
        if (predict->parsed()) return cmd_predict(model_path, points_path, out_path);
        if (experiment->parsed()) return cmd_experiment(config_path, out_dir);
        if (bound->parsed()) return cmd_bound(bound_name, ba);
        if (verify->parsed()) return cmd_verify(which, scale);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sr::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
