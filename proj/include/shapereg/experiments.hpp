#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "shapereg/bounds.hpp"
#include "shapereg/csv.hpp"
#include "shapereg/estimators.hpp"
#include "shapereg/shape.hpp"
#include "shapereg/synth.hpp"

namespace shapereg {

// Monte Carlo harness. All randomness flows from the config seed through
// derive_seed(seed, n, replicate, role), so results are a pure function of
// the configuration and identical for every parallelism degree.

// ---------------------------------------------------------------------------
// Work scheduling
// ---------------------------------------------------------------------------

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SHAPEREG_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

/// Runs fn(0..total-1); workers pull indices from a shared counter. Each
/// item must write only its own slot.
inline void parallel_for(std::size_t total, int threads, const std::function<void(std::size_t)>& fn) {
    const int t = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                        total ? total : 1);
    if (t <= 1) {
        for (std::size_t i = 0; i < total; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= total) break;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Method schedules
// ---------------------------------------------------------------------------

/// A hyperparameter that is either a fixed value or a named n-dependent rule.
struct HyperParam {
    double value = 0.0;
    std::string rule; ///< empty = fixed value
};

struct MethodSpec {
    Method method = Method::KNN;
    HyperParam k;        ///< knn; rule "choose_k"
    HyperParam m;        ///< cart / proto / optinet size; rules "sqrt_n", "theory"
    double beta = 2.0;   ///< cart shape constraint
    HyperParam cuts;     ///< fixed partition cuts per dim; rule "n_quarter"
    HyperParam eta;      ///< optinet; rule "theory" = n^{-1/(d+2)}
    HyperParam levels;   ///< centered/uniform rounds; rule "theory"
    HyperParam lifetime; ///< mondrian; rule "theory" = n^{1/(d+2)}
    XLawSpec prototype_law{};        ///< proto/optinet prototype draw
    bool prototype_law_set = false;  ///< unset: the harness uses the data's x law
};

namespace detail {

inline long long resolve_hyper(const HyperParam& h, const char* what, Method method,
                               std::size_t n, int d, double delta) {
    if (h.rule.empty()) return static_cast<long long>(h.value);
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    if (h.rule == "choose_k") return choose_k(n, d, delta);
    if (h.rule == "sqrt_n") return static_cast<long long>(std::ceil(std::sqrt(nn)));
    if (h.rule == "theory") {
        if (method == Method::CartLike)
            return std::llround(std::pow(nn, 2.0 / (dd + 2.0)) *
                                std::pow(2.0 * dd * std::log(nn + 1.0) + std::log(1.0 / delta),
                                         dd / (dd + 2.0)));
        if (method == Method::ProtoNN || method == Method::OptiNet)
            return static_cast<long long>(std::ceil(std::pow(nn, dd / (dd + 2.0))));
        if (method == Method::CenteredTree)
            return std::llround(dd * std::log(nn) / ((dd + 2.0) * std::log(2.0)));
        if (method == Method::UniformTree)
            return std::llround(dd * std::log(nn) / (dd + 2.0));
    }
    if (h.rule == "n_quarter") return static_cast<long long>(std::ceil(std::pow(nn, 0.25)));
    throw std::invalid_argument(std::string("unknown rule '") + h.rule + "' for " + what);
}

inline double resolve_hyper_real(const HyperParam& h, Method method, std::size_t n, int d) {
    if (h.rule.empty()) return h.value;
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    if (h.rule == "theory") {
        if (method == Method::OptiNet) return std::pow(nn, -1.0 / (dd + 2.0));
        if (method == Method::Mondrian) return std::pow(nn, 1.0 / (dd + 2.0));
    }
    throw std::invalid_argument("unknown real-valued rule '" + h.rule + "'");
}

inline std::vector<std::vector<double>> even_cuts(int per_dim, int d) {
    std::vector<double> one;
    one.reserve(per_dim);
    for (int i = 1; i <= per_dim; ++i)
        one.push_back(static_cast<double>(i) / (per_dim + 1.0));
    return std::vector<std::vector<double>>(d, one);
}

} // namespace detail

struct ResolvedFit {
    LocalModel model;
    std::string params; ///< compact JSON of the concrete hyperparameters
};

/// Resolves the schedule at sample size n and fits. Throws
/// std::invalid_argument on infeasible hyperparameters (e.g. k > n).
inline ResolvedFit fit_method(const MethodSpec& spec, const Dataset& data, double delta,
                              std::uint64_t fit_seed) {
    const std::size_t n = data.n();
    const int d = data.d;
    switch (spec.method) {
    case Method::KNN: {
        const long long k = detail::resolve_hyper(spec.k, "k", spec.method, n, d, delta);
        return {fit_knn(data, static_cast<int>(k)), "{\"k\":" + format_u64(k) + "}"};
    }
    case Method::FixedPartition: {
        const long long c = detail::resolve_hyper(spec.cuts, "cuts", spec.method, n, d, delta);
        return {fit_fixed_partition(data, detail::even_cuts(static_cast<int>(c), d)),
                "{\"cuts_per_dim\":" + format_u64(c) + "}"};
    }
    case Method::CartLike: {
        const long long m = detail::resolve_hyper(spec.m, "m", spec.method, n, d, delta);
        return {fit_cart_like(data, static_cast<int>(m), spec.beta),
                "{\"beta\":" + format_double(spec.beta) + ",\"m\":" + format_u64(m) + "}"};
    }
    case Method::ProtoNN: {
        const long long m = detail::resolve_hyper(spec.m, "m", spec.method, n, d, delta);
        return {fit_proto_nn(data, static_cast<std::size_t>(m), fit_seed, spec.prototype_law),
                "{\"m\":" + format_u64(m) + "}"};
    }
    case Method::OptiNet: {
        const long long m = detail::resolve_hyper(spec.m, "m", spec.method, n, d, delta);
        const double eta = detail::resolve_hyper_real(spec.eta, spec.method, n, d);
        return {fit_optinet(data, static_cast<std::size_t>(m), eta, fit_seed, spec.prototype_law),
                "{\"eta\":" + format_double(eta) + ",\"m\":" + format_u64(m) + "}"};
    }
    case Method::CenteredTree:
    case Method::UniformTree: {
        const long long N = detail::resolve_hyper(spec.levels, "levels", spec.method, n, d, delta);
        LocalModel m = spec.method == Method::CenteredTree
                           ? fit_centered_tree(data, static_cast<int>(N), fit_seed)
                           : fit_uniform_tree(data, static_cast<int>(N), fit_seed);
        return {std::move(m), "{\"levels\":" + format_u64(N) + "}"};
    }
    case Method::Mondrian: {
        const double lt = detail::resolve_hyper_real(spec.lifetime, spec.method, n, d);
        return {fit_mondrian(data, lt, fit_seed), "{\"lifetime\":" + format_double(lt) + "}"};
    }
    }
    throw std::invalid_argument("fit_method: unknown method");
}

// ---------------------------------------------------------------------------
// Evaluation grids
// ---------------------------------------------------------------------------

struct EvalGrid {
    std::vector<double> pts; ///< count*d row-major
    std::size_t count = 0;
    int d = 1;

    std::span<const double> point(std::size_t i) const {
        return {pts.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
};

/// Regular lattice of G^d points for d <= 3 (G = 101 for d <= 2, 21 for
/// d = 3), otherwise 10^4 seeded uniform points. The measured sup over the
/// grid is a lower bound on the true sup.
inline EvalGrid make_eval_grid(int d, std::uint64_t seed) {
    EvalGrid g;
    g.d = d;
    if (d <= 3) {
        const int G = d <= 2 ? 101 : 21;
        std::size_t total = 1;
        for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(G);
        g.count = total;
        g.pts.reserve(total * d);
        std::vector<int> digit(d, 0);
        for (std::size_t i = 0; i < total; ++i) {
            for (int k = 0; k < d; ++k)
                g.pts.push_back(static_cast<double>(digit[k]) / (G - 1));
            for (int k = 0; k < d; ++k) {
                if (++digit[k] < G) break;
                digit[k] = 0;
            }
        }
    } else {
        g.count = 10000;
        Rng rng(derive_seed(seed, 0, 0, role::grid));
        g.pts.reserve(g.count * d);
        for (std::size_t i = 0; i < g.count; ++i)
            for (int k = 0; k < d; ++k) g.pts.push_back(rng.uniform());
    }
    return g;
}

/// Empirical sup-norm error max over the grid of |predict - g|.
inline double sup_norm_error(const LocalModel& model, const RegressionProblem& problem,
                             const EvalGrid& grid) {
    if (grid.count == 0) throw std::invalid_argument("sup_norm_error: empty grid");
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const auto x = grid.point(i);
        worst = std::max(worst, std::abs(model.predict(x) - eval_g(problem, x)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Error experiments and rate fits
// ---------------------------------------------------------------------------

enum class EvalKind { Pointwise, SupNorm };

struct EvalSpec {
    EvalKind kind = EvalKind::SupNorm;
    std::vector<double> x0; ///< pointwise evaluation point
};

struct ExperimentConfig {
    RegressionProblem problem;
    MethodSpec method;
    std::vector<std::size_t> n_grid;
    int replicates = 1;
    EvalSpec eval;
    std::uint64_t seed = 1;
    double delta = 0.1;

    void validate() const {
        if (replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
        for (std::size_t i = 1; i < n_grid.size(); ++i)
            if (!(n_grid[i] > n_grid[i - 1]))
                throw std::invalid_argument("config: n_grid must be strictly increasing");
        if (eval.kind == EvalKind::Pointwise &&
            static_cast<int>(eval.x0.size()) != problem.d)
            throw std::invalid_argument("config: x0 dimension mismatch");
    }
};

struct TrialRecord {
    std::size_t n = 0;
    int replicate = 0;
    std::string method;
    std::string params; ///< concrete hyperparameters, compact JSON
    double error = std::numeric_limits<double>::quiet_NaN();
    double wall_time_ms = 0.0;
    bool skipped = false;
    std::string skip_reason;
};

inline std::vector<TrialRecord> run_error_experiment(const ExperimentConfig& cfg,
                                                     int threads = 0) {
    cfg.validate();
    MethodSpec method = cfg.method;
    if (!method.prototype_law_set)
        method.prototype_law = {cfg.problem.x_law, cfg.problem.x_law_param};
    const EvalGrid grid = cfg.eval.kind == EvalKind::SupNorm
                              ? make_eval_grid(cfg.problem.d, cfg.seed)
                              : EvalGrid{};
    const std::size_t total = cfg.n_grid.size() * static_cast<std::size_t>(cfg.replicates);
    std::vector<TrialRecord> records(total);
    parallel_for(total, threads, [&](std::size_t t) {
        const std::size_t ni = t / cfg.replicates;
        const int rep = static_cast<int>(t % cfg.replicates);
        const std::size_t n = cfg.n_grid[ni];
        TrialRecord& rec = records[t];
        rec.n = n;
        rec.replicate = rep;
        rec.method = method_name(cfg.method.method);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Dataset data =
                generate(cfg.problem, n, derive_seed(cfg.seed, n, rep, role::data));
            ResolvedFit fit =
                fit_method(method, data, cfg.delta, derive_seed(cfg.seed, n, rep, role::fit));
            rec.params = std::move(fit.params);
            rec.error = cfg.eval.kind == EvalKind::SupNorm
                            ? sup_norm_error(fit.model, cfg.problem, grid)
                            : std::abs(fit.model.predict(cfg.eval.x0) -
                                       eval_g(cfg.problem, cfg.eval.x0));
        } catch (const std::invalid_argument& e) {
            rec.skipped = true;
            rec.skip_reason = e.what();
        }
        rec.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
    });
    return records;
}

struct RateFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
    double slope_stderr = std::numeric_limits<double>::quiet_NaN();
    int n_points = 0;
    bool dropped_burn_in = false;
    bool valid = false;
    std::string note;
};

/// OLS of log(mean error) on log(n). The smallest n is dropped when its mean
/// error exceeds the range of g (pre-asymptotic transient), and the drop is
/// recorded. Requires three distinct n values; exact zero errors flag the
/// fit as undefined.
inline RateFit fit_rate(const std::vector<TrialRecord>& records,
                        const RegressionProblem& problem) {
    std::vector<std::pair<double, double>> by_n; // (n, mean error)
    for (const auto& r : records) {
        if (r.skipped) continue;
        auto it = std::find_if(by_n.begin(), by_n.end(), [&](const auto& p) {
            return p.first == static_cast<double>(r.n);
        });
        if (it == by_n.end()) by_n.push_back({static_cast<double>(r.n), 0.0});
    }
    std::sort(by_n.begin(), by_n.end());
    for (auto& [n, mean] : by_n) {
        double s = 0.0;
        std::size_t c = 0;
        for (const auto& r : records)
            if (!r.skipped && static_cast<double>(r.n) == n) {
                s += r.error;
                ++c;
            }
        mean = s / static_cast<double>(c);
    }
    RateFit out;
    if (!by_n.empty() && by_n.front().second > problem.g_range() && by_n.size() > 1) {
        by_n.erase(by_n.begin());
        out.dropped_burn_in = true;
    }
    if (by_n.size() < 3) {
        out.note = "need at least 3 distinct n values";
        return out;
    }
    for (const auto& [n, mean] : by_n)
        if (!(mean > 0.0)) {
            out.note = "zero mean error; log-log slope undefined";
            return out;
        }
    const std::size_t k = by_n.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [n, mean] : by_n) {
        const double x = std::log(n), y = std::log(mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double kk = static_cast<double>(k);
    const double vxx = sxx - sx * sx / kk;
    const double vxy = sxy - sx * sy / kk;
    const double vyy = syy - sy * sy / kk;
    out.slope = vxy / vxx;
    out.intercept = (sy - out.slope * sx) / kk;
    const double sse = vyy - out.slope * vxy;
    out.r2 = vyy > 0.0 ? 1.0 - sse / vyy : 1.0;
    out.slope_stderr = k > 2 ? std::sqrt(std::max(0.0, sse / (kk - 2.0)) / vxx) : 0.0;
    out.n_points = static_cast<int>(k);
    out.valid = true;
    return out;
}

// ---------------------------------------------------------------------------
// Bound-frequency verification
// ---------------------------------------------------------------------------

struct VarianceCheck {
    double violation_freq = 0.0;
    double bound = 0.0;
    int replicates = 0;
};

/// Theorem-level check of the variance bound on a fixed hyper-rectangle
/// partition (VC dimension 2d): per replicate, the sup over cells of
/// sum(eps)/sqrt(count) with oracle noise is compared to the bound.
inline VarianceCheck verify_variance_bound(const std::vector<std::vector<double>>& cuts,
                                           const RegressionProblem& problem, std::size_t n,
                                           double delta, int replicates, std::uint64_t seed,
                                           int threads = 0) {
    if (static_cast<int>(cuts.size()) != problem.d)
        throw std::invalid_argument("verify_variance_bound: cuts/dim mismatch");
    const double bound = variance_bound(problem.sigma2(), static_cast<double>(n),
                                        2.0 * problem.d, delta);
    std::size_t total_cells = 1;
    for (const auto& c : cuts) total_cells *= c.size() + 1;
    std::vector<char> violated(replicates, 0);
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
        const OracleSample os =
            generate_oracle(problem, n, derive_seed(seed, n, rep, role::data));
        std::vector<double> cell_sum(total_cells, 0.0);
        std::vector<std::size_t> cell_cnt(total_cells, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = os.data.row(i);
            std::size_t idx = 0, stride = 1;
            for (int kk = 0; kk < problem.d; ++kk) {
                const auto& ck = cuts[kk];
                idx += (std::lower_bound(ck.begin(), ck.end(), x[kk]) - ck.begin()) * stride;
                stride *= ck.size() + 1;
            }
            cell_sum[idx] += os.eps[i];
            cell_cnt[idx] += 1;
        }
        double stat = 0.0;
        for (std::size_t c = 0; c < total_cells; ++c)
            if (cell_cnt[c] > 0)
                stat = std::max(stat, cell_sum[c] / std::sqrt(static_cast<double>(cell_cnt[c])));
        violated[rep] = stat > bound ? 1 : 0;
    });
    std::size_t bad = 0;
    for (char v : violated) bad += v;
    return {static_cast<double>(bad) / replicates, bound, replicates};
}

// ---------------------------------------------------------------------------
// Purely random tree cell simulators
// ---------------------------------------------------------------------------

enum class PrtKind { Centered, Uniform };

struct PrtCellSim {
    HyperRect rect;
    std::vector<double> sbar; ///< realized one-sided length reductions
};

namespace detail {
inline PrtCellSim sim_from_sides(std::vector<double> sides, std::vector<double> sbar) {
    PrtCellSim out;
    std::vector<double> lo(sides.size(), 0.0);
    out.rect = HyperRect(std::move(lo), std::move(sides));
    out.sbar = std::move(sbar);
    return out;
}
} // namespace detail

/// The per-leaf marginal law of a PRT cell after N splits: each step scales
/// an independently chosen coordinate by the drawn fraction itself (any fixed
/// root-to-leaf path realizes this law). The distributional statements about
/// cell volume, diameter and aspect are all stated for this law. Sides are
/// tracked multiplicatively; the cell is reported anchored at the origin.
inline PrtCellSim simulate_prt_path(PrtKind kind, int n_splits, int d, Rng& rng) {
    std::vector<double> sides(d, 1.0), sbar;
    sbar.reserve(n_splits);
    for (int i = 0; i < n_splits; ++i) {
        const int p = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d)));
        const double s = kind == PrtKind::Centered ? 0.5 : rng.uniform();
        sides[p] *= s;
        sbar.push_back(s);
    }
    return detail::sim_from_sides(std::move(sides), std::move(sbar));
}

/// The cell containing x in the grown tree: the side holding x is retained,
/// so sbar records S or 1-S according to x's position. Runs in coordinates
/// relative to the current cell, keeping the side lengths one rounding per
/// step away from the product of reductions.
inline PrtCellSim simulate_prt_cell_of(PrtKind kind, int n_splits, int d,
                                       std::span<const double> x, Rng& rng) {
    std::vector<double> sides(d, 1.0), sbar;
    std::vector<double> xrel(x.begin(), x.end());
    sbar.reserve(n_splits);
    for (int i = 0; i < n_splits; ++i) {
        const int p = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d)));
        const double s = kind == PrtKind::Centered ? 0.5 : rng.uniform();
        if (xrel[p] <= s) {
            sides[p] *= s;
            xrel[p] /= s;
            sbar.push_back(s);
        } else {
            sides[p] *= 1.0 - s;
            xrel[p] = (xrel[p] - s) / (1.0 - s);
            sbar.push_back(1.0 - s);
        }
    }
    return detail::sim_from_sides(std::move(sides), std::move(sbar));
}

struct VolumeInvarianceCheck {
    double max_rel_error = 0.0;
    bool centered_exact = true; ///< centered trees: leaf volume == 2^{-N} bit-exactly
};

/// Lebesgue volume invariance: the computed leaf volume against the product
/// of recorded length reductions along the ancestry of a random point.
inline VolumeInvarianceCheck verify_volume_invariance(PrtKind kind, int n_splits, int d,
                                                      int replicates, std::uint64_t seed,
                                                      int threads = 0) {
    if (n_splits < 0) throw std::invalid_argument("verify_volume_invariance: N must be >= 0");
    std::vector<double> rel(replicates, 0.0);
    std::vector<char> exact(replicates, 1);
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
        Rng rng(derive_seed(seed, rep, 0, role::mc));
        std::vector<double> x(d);
        for (int k = 0; k < d; ++k) x[k] = rng.uniform();
        const PrtCellSim sim = simulate_prt_cell_of(kind, n_splits, d, x, rng);
        double prod = 1.0;
        for (double s : sim.sbar) prod *= s;
        const double vol = sim.rect.volume();
        rel[rep] = std::abs(vol - prod) / std::max(prod, 1e-300);
        if (kind == PrtKind::Centered) exact[rep] = vol == std::ldexp(1.0, -n_splits) ? 1 : 0;
    });
    VolumeInvarianceCheck out;
    for (int r = 0; r < replicates; ++r) {
        out.max_rel_error = std::max(out.max_rel_error, rel[r]);
        if (!exact[r]) out.centered_exact = false;
    }
    return out;
}

struct AspectCheck {
    double empirical_prob = 0.0;
    double threshold = 0.0;
    double prob_floor = 0.0;
    double std_err = 0.0;
    int replicates = 0;
};

/// Frequency of the non-shape-regularity event h_+/h_- >= e^{sqrt(N/d)}
/// (uniform) or 2^{sqrt(N/d)} (centered); the propositions put it at >= 1/11
/// and >= 1/14 respectively. In dimension 1 the aspect is identically 1 and
/// the frequency degenerates to 0.
inline AspectCheck verify_aspect_lower_bound(PrtKind kind, int n_splits, int d, int replicates,
                                             std::uint64_t seed, int threads = 0) {
    if (n_splits < d)
        throw std::invalid_argument("verify_aspect_lower_bound: requires N >= d");
    const double root = std::sqrt(static_cast<double>(n_splits) / d);
    const double threshold =
        kind == PrtKind::Uniform ? std::exp(root) : std::exp2(root);
    std::vector<char> hit(replicates, 0);
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
        Rng rng(derive_seed(seed, rep, 0, role::mc));
        const PrtCellSim sim = simulate_prt_path(kind, n_splits, d, rng);
        hit[rep] = beta_of(sim.rect) >= threshold ? 1 : 0;
    });
    std::size_t cnt = 0;
    for (char h : hit) cnt += h;
    AspectCheck out;
    out.empirical_prob = static_cast<double>(cnt) / replicates;
    out.threshold = threshold;
    out.prob_floor = kind == PrtKind::Uniform ? 1.0 / 11.0 : 1.0 / 14.0;
    out.std_err = std::sqrt(out.empirical_prob * (1.0 - out.empirical_prob) / replicates);
    out.replicates = replicates;
    return out;
}

struct PrtTailCheck {
    double empirical_tail = 0.0;
    double bound_tail = 0.0;
    double threshold = 0.0;
    double std_err = 0.0;
};

/// Empirical frequency of a diameter/volume tail event against the analytic
/// bound from prt_tail_bounds.
inline PrtTailCheck verify_prt_diam_vol(PrtTailKind kind, int n_splits, int d, int replicates,
                                        std::uint64_t seed, double parameter,
                                        int threads = 0) {
    const PrtTailBound b = prt_tail_bounds(kind, n_splits, d, parameter);
    const PrtKind tree = kind == PrtTailKind::CenteredDiam ? PrtKind::Centered : PrtKind::Uniform;
    const bool on_volume = kind == PrtTailKind::UniformVol;
    std::vector<char> hit(replicates, 0);
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
        Rng rng(derive_seed(seed, rep, 0, role::mc));
        const PrtCellSim sim = simulate_prt_path(tree, n_splits, d, rng);
        const double v = on_volume ? sim.rect.volume() : sim.rect.diameter();
        hit[rep] = (b.event_is_lower ? v <= b.threshold : v >= b.threshold) ? 1 : 0;
    });
    std::size_t cnt = 0;
    for (char h : hit) cnt += h;
    PrtTailCheck out;
    out.empirical_tail = static_cast<double>(cnt) / replicates;
    out.bound_tail = b.tail;
    out.threshold = b.threshold;
    out.std_err = std::sqrt(out.empirical_tail * (1.0 - out.empirical_tail) / replicates);
    return out;
}

// ---------------------------------------------------------------------------
// Anisotropy counterexample
// ---------------------------------------------------------------------------

/// Constant in the anisotropic lower bound C_d (gamma sigma^2 / n)^{1/(d+2)}.
inline double counterexample_constant(int d) {
    const double dd = static_cast<double>(d);
    return std::sqrt(2.0 / dd + 1.0) * std::pow(dd / 2.0, 1.0 / (dd + 2.0)) *
           std::pow(powint(2.0, d) * std::sqrt(72.0), -dd / (dd + 2.0));
}

enum class CellSchedule { Isotropic, Anisotropic };

struct CounterexampleRecord {
    std::string schedule;
    std::size_t n = 0;
    double rmse = 0.0;
    double lower_bound = 0.0;
    double gamma_bar = 0.0;
    bool validity_ok = false; ///< n * vol >= 2^{d+4} log 2
    int replicates = 0;
};

/// Estimates g(x) = sum_k x_k at the origin with a single fixed rectangular
/// cell prod [0, h_k]. Isotropic schedule: h_k = n^{-1/(d+2)}. Anisotropic:
/// h_1 = n^{-3/(d+2)} with the remaining sides at the largest admissible
/// value 1, so the shape parameter gamma_bar diverges with n. Each record
/// carries the proposition's validity flag.
inline std::vector<CounterexampleRecord> run_counterexample(int d, double sigma,
                                                            const std::vector<std::size_t>& n_grid,
                                                            int replicates, std::uint64_t seed,
                                                            int threads = 0) {
    RegressionProblem problem;
    problem.d = d;
    problem.g = GKind::LinearSum;
    problem.noise = NoiseKind::Gaussian;
    problem.noise_param = sigma;
    const double cd = counterexample_constant(d);
    std::vector<CounterexampleRecord> out;
    for (int sched = 0; sched < 2; ++sched) {
        for (std::size_t n : n_grid) {
            const double nn = static_cast<double>(n);
            std::vector<double> h(d);
            if (sched == 0) {
                std::fill(h.begin(), h.end(), std::pow(nn, -1.0 / (d + 2.0)));
            } else {
                std::fill(h.begin(), h.end(), 1.0);
                h[0] = std::pow(nn, -3.0 / (d + 2.0));
            }
            HyperRect cell(std::vector<double>(d, 0.0), h, false);
            const double vol = cell.volume();
            CounterexampleRecord rec;
            rec.schedule = sched == 0 ? "isotropic" : "anisotropic";
            rec.n = n;
            rec.replicates = replicates;
            rec.gamma_bar = powint(cell.diameter(), d) / vol;
            rec.lower_bound = cd * std::pow(rec.gamma_bar * sigma * sigma / nn, 1.0 / (d + 2.0));
            rec.validity_ok = nn * vol >= powint(2.0, d + 4) * std::log(2.0);
            std::vector<double> sq(replicates, 0.0);
            parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
                const Dataset data = generate(
                    problem, n, derive_seed(derive_seed(seed, sched), n, rep, role::data));
                const double pred = local_average(data, Cell{cell});
                sq[rep] = pred * pred; // g(0) = 0
            });
            double mse = 0.0;
            for (double v : sq) mse += v;
            rec.rmse = std::sqrt(mse / replicates);
            out.push_back(std::move(rec));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mondrian geometry
// ---------------------------------------------------------------------------

struct MondrianGeometryCheck {
    double aspect_exceed_freq = 0.0;
    double aspect_threshold = 0.0;
    double aspect_freq_bound = 0.0; ///< 2 delta
    double aspect_std_err = 0.0;
    double mean_first_split = 0.0;
    double first_split_std_err = 0.0;
    double expected_first_split = 0.0; ///< 1/d
    double hminus_cdf_gap = 0.0;
    int replicates = 0;
};

/// Geometry of the lifetime-pruned Mondrian cell at x = (1/2,...,1/2):
/// aspect-ratio tail against the analytic threshold, mean first split time of
/// the unit cube against 1/d, and the h_- law against the oracle min of d
/// independent Gamma(2,lifetime) side lengths, each truncated to the
/// distance budget the unit cube leaves around x.
inline MondrianGeometryCheck verify_mondrian_geometry(double lifetime, int d, double delta,
                                                      int replicates, std::uint64_t seed,
                                                      int threads = 0) {
    if (!(lifetime > 0.0))
        throw std::invalid_argument("verify_mondrian_geometry: lifetime must be > 0");
    if (replicates < 2)
        throw std::invalid_argument("verify_mondrian_geometry: need at least 2 replicates");
    if (!(delta > 0.0 && delta <= 1.0 - std::pow(1.0 - std::exp(-1.0), d)))
        throw std::invalid_argument(
            "verify_mondrian_geometry: delta must satisfy delta <= 1-(1-1/e)^d");
    const std::vector<double> x(d, 0.5);
    const Dataset empty{{}, {}, d};
    std::vector<double> aspect(replicates), hminus(replicates), first(replicates),
        oracle(replicates);
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
        const LocalModel m =
            fit_mondrian(empty, lifetime, derive_seed(seed, rep, 0, role::fit));
        first[rep] = m.tree[0].split_time;
        const TreeNode& leaf = m.tree[m.leaf_index_of(x)];
        aspect[rep] = beta_of(leaf.rect);
        hminus[rep] = leaf.rect.h_minus();
        Rng orng(derive_seed(seed, rep, 0, role::oracle));
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < d; ++k) {
            const double lo = std::min(orng.exponential(lifetime), x[k]);
            const double hi = std::min(orng.exponential(lifetime), 1.0 - x[k]);
            best = std::min(best, lo + hi);
        }
        oracle[rep] = best;
    });
    MondrianGeometryCheck out;
    out.replicates = replicates;
    out.aspect_threshold = 5.0 * d * std::log(delta / d) / std::log(1.0 - delta);
    out.aspect_freq_bound = 2.0 * delta;
    std::size_t exceed = 0;
    double fs = 0.0;
    for (int r = 0; r < replicates; ++r) {
        if (aspect[r] > out.aspect_threshold) ++exceed;
        fs += first[r];
    }
    out.aspect_exceed_freq = static_cast<double>(exceed) / replicates;
    out.aspect_std_err =
        std::sqrt(out.aspect_exceed_freq * (1.0 - out.aspect_exceed_freq) / replicates);
    out.mean_first_split = fs / replicates;
    double var = 0.0;
    for (int r = 0; r < replicates; ++r)
        var += (first[r] - out.mean_first_split) * (first[r] - out.mean_first_split);
    out.first_split_std_err = std::sqrt(var / (replicates - 1.0) / replicates);
    out.expected_first_split = 1.0 / d;

    std::sort(hminus.begin(), hminus.end());
    std::sort(oracle.begin(), oracle.end());
    const double tmax = std::max(hminus.back(), oracle.back());
    double gap = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double t = tmax * j / 100.0;
        const double f1 =
            static_cast<double>(std::upper_bound(hminus.begin(), hminus.end(), t) -
                                hminus.begin()) /
            replicates;
        const double f2 =
            static_cast<double>(std::upper_bound(oracle.begin(), oracle.end(), t) -
                                oracle.begin()) /
            replicates;
        gap = std::max(gap, std::abs(f1 - f2));
    }
    out.hminus_cdf_gap = gap;
    return out;
}

// ---------------------------------------------------------------------------
// Record CSV
// ---------------------------------------------------------------------------

/// records.csv contract: columns n, replicate, method, params_json, error,
/// wall_time_ms. Timing is written as 0 unless include_timing is set, so the
/// default output is byte-identical across runs and thread counts.
inline std::string records_to_csv(const std::vector<TrialRecord>& records,
                                  bool include_timing = false) {
    std::string out = "n,replicate,method,params_json,error,wall_time_ms\n";
    for (const auto& r : records) {
        out += format_u64(r.n);
        out += ',';
        out += format_u64(static_cast<std::uint64_t>(r.replicate));
        out += ',';
        out += r.method;
        out += ',';
        out += csv_escape(r.skipped ? std::string("{\"skipped\":\"") + r.skip_reason + "\"}"
                                    : r.params);
        out += ',';
        out += r.skipped ? "nan" : format_double(r.error);
        out += ',';
        out += include_timing ? format_double(r.wall_time_ms) : "0";
        out += '\n';
    }
    return out;
}

inline std::string counterexample_to_csv(const std::vector<CounterexampleRecord>& records) {
    std::string out = "schedule,n,rmse,lower_bound,gamma_bar,validity_ok,replicates\n";
    for (const auto& r : records) {
        out += r.schedule;
        out += ',';
        out += format_u64(r.n);
        out += ',';
        out += format_double(r.rmse);
        out += ',';
        out += format_double(r.lower_bound);
        out += ',';
        out += format_double(r.gamma_bar);
        out += ',';
        out += r.validity_ok ? "1" : "0";
        out += ',';
        out += format_u64(static_cast<std::uint64_t>(r.replicates));
        out += '\n';
    }
    return out;
}

} // namespace shapereg
