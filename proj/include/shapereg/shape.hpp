#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "shapereg/core.hpp"
#include "shapereg/estimators.hpp"
#include "shapereg/geometry.hpp"

namespace shapereg {

// Shape-regularity diagnostics. A set is gamma-SR when diam^d <= gamma *
// volume; a hyper-rectangle is beta-SR when h_+ <= beta * h_-.

/// diam(cell)^d / volume(cell); infinite sentinel on zero volume.
inline double gamma_of(const Cell& cell) {
    const int d = cell_dim(cell);
    double diam = 0.0, vol = 0.0;
    std::visit([&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, VoronoiCellRef>) {
            throw std::invalid_argument("gamma_of: Voronoi cells need Monte Carlo estimates");
        } else {
            diam = v.diameter();
            vol = v.volume();
        }
    }, cell);
    if (!(vol > 0.0)) return std::numeric_limits<double>::infinity();
    return powint(diam, d) / vol;
}

inline double gamma_of_estimates(double diameter_est, double volume_est, int d) {
    if (!(volume_est > 0.0)) return std::numeric_limits<double>::infinity();
    return powint(diameter_est, d) / volume_est;
}

/// h_+ / h_-; infinite sentinel when the smallest side vanishes.
inline double beta_of(const HyperRect& r) {
    const double hm = r.h_minus();
    if (!(hm > 0.0)) return std::numeric_limits<double>::infinity();
    return r.h_plus() / hm;
}

/// A beta-SR rectangle is gamma-SR with gamma = beta^d d^{d/2}.
inline double beta_to_gamma(double beta, int d) {
    if (!(beta >= 1.0) || d < 1) throw std::invalid_argument("beta_to_gamma: bad arguments");
    return powint(beta, d) * std::pow(static_cast<double>(d), d / 2.0);
}

/// Converse direction: a gamma-SR rectangle is beta-SR with beta = gamma.
inline bool gamma_to_beta_check(const HyperRect& r, double gamma) {
    return beta_of(r) <= gamma;
}

struct ShapeCellRecord {
    std::size_t cell_id = 0;
    double diameter = 0.0;
    double volume = 0.0;
    double gamma = 0.0;
    double aspect = std::numeric_limits<double>::quiet_NaN(); ///< rects only
    bool is_estimate = false; ///< Voronoi: Monte Carlo values
    double std_err = 0.0;
    bool degenerate = false;
};

struct ShapeReport {
    std::vector<ShapeCellRecord> cells;
    double max_gamma = 0.0;
    double max_aspect = 0.0;
    std::size_t n_degenerate = 0;
    double frac_gamma_above = 0.0;  ///< fraction with gamma > gamma_threshold
    double frac_aspect_above = 0.0; ///< fraction with aspect > beta_threshold
    double gamma_threshold = std::numeric_limits<double>::quiet_NaN();
    double beta_threshold = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void finish_report(ShapeReport& rep, double gamma_thr, double beta_thr) {
    rep.gamma_threshold = gamma_thr;
    rep.beta_threshold = beta_thr;
    std::size_t above_g = 0, above_b = 0, n_aspect = 0;
    for (const auto& c : rep.cells) {
        if (c.degenerate) {
            ++rep.n_degenerate;
            continue;
        }
        rep.max_gamma = std::max(rep.max_gamma, c.gamma);
        if (!std::isnan(gamma_thr) && c.gamma > gamma_thr) ++above_g;
        if (!std::isnan(c.aspect)) {
            ++n_aspect;
            rep.max_aspect = std::max(rep.max_aspect, c.aspect);
            if (!std::isnan(beta_thr) && c.aspect > beta_thr) ++above_b;
        }
    }
    const std::size_t live = rep.cells.size() - rep.n_degenerate;
    rep.frac_gamma_above = live ? static_cast<double>(above_g) / live : 0.0;
    rep.frac_aspect_above = n_aspect ? static_cast<double>(above_b) / n_aspect : 0.0;
}

} // namespace detail

/// Per-cell shape diagnostics for a fitted model. Partition models get all
/// leaves exactly; k-NN and Voronoi models are probed at mc_budget query
/// points (Voronoi geometry is itself Monte Carlo estimated and flagged).
/// Degenerate cells count separately, never silently dropped.
inline ShapeReport audit_partition(const LocalModel& model, const HyperRect& domain,
                                   int mc_budget, std::uint64_t seed,
                                   double gamma_threshold = std::numeric_limits<double>::quiet_NaN(),
                                   double beta_threshold = std::numeric_limits<double>::quiet_NaN()) {
    ShapeReport rep;
    if (model.method == Method::FixedPartition || model.is_tree()) {
        auto leaves = model.leaf_cells();
        rep.cells.reserve(leaves.size());
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            ShapeCellRecord rec;
            rec.cell_id = i;
            rec.diameter = leaves[i].diameter();
            rec.volume = leaves[i].volume();
            rec.aspect = beta_of(leaves[i]);
            rec.gamma = gamma_of(Cell{leaves[i]});
            rec.degenerate = !(rec.volume > 0.0);
            rep.cells.push_back(rec);
        }
    } else if (model.method == Method::KNN) {
        Rng rng(seed);
        std::vector<double> x(model.d);
        for (int t = 0; t < mc_budget; ++t) {
            for (int k = 0; k < model.d; ++k)
                x[k] = domain.lower[k] + domain.side(k) * rng.uniform();
            const Cell c = model.cell_of(x);
            ShapeCellRecord rec;
            rec.cell_id = static_cast<std::size_t>(t);
            const auto& ball = std::get<BallCell>(c);
            rec.diameter = ball.diameter();
            rec.volume = ball.volume();
            rec.gamma = gamma_of(c);
            rec.degenerate = !(rec.volume > 0.0);
            rep.cells.push_back(rec);
        }
    } else {
        // Voronoi cells: probe queries, estimate each distinct cell once
        Rng rng(seed);
        std::vector<double> x(model.d);
        std::vector<bool> seen(model.n_sites, false);
        const int probes = std::max(1, mc_budget / 10);
        for (int t = 0; t < probes; ++t) {
            for (int k = 0; k < model.d; ++k)
                x[k] = domain.lower[k] + domain.side(k) * rng.uniform();
            seen[model.nearest_site_index(x)] = true;
        }
        for (std::size_t j = 0; j < model.n_sites; ++j) {
            if (!seen[j]) continue;
            VoronoiCellRef cell{model.sites, model.n_sites, model.d, j};
            const auto est = voronoi_cell_estimate(cell, domain, std::max(100, mc_budget),
                                                   derive_seed(seed, j, 0, role::mc));
            ShapeCellRecord rec;
            rec.cell_id = j;
            rec.is_estimate = true;
            rec.diameter = est.diameter_est;
            rec.volume = est.volume_est;
            rec.std_err = est.std_err;
            rec.degenerate = est.degenerate;
            rec.gamma = gamma_of_estimates(est.diameter_est, est.volume_est, model.d);
            rep.cells.push_back(rec);
        }
    }
    detail::finish_report(rep, gamma_threshold, beta_threshold);
    return rep;
}

} // namespace shapereg
