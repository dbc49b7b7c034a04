#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "shapereg/dataset.hpp"
#include "shapereg/geometry.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

/// Mean of a value list, permutation-invariant and exact on constant input:
/// terms are sorted, shifted by the minimum and summed sequentially.
inline double stable_mean(std::vector<double>& vals) {
    if (vals.empty()) return 0.0;
    std::sort(vals.begin(), vals.end());
    const double base = vals.front();
    double s = 0.0;
    for (double v : vals) s += v - base;
    return base + s / static_cast<double>(vals.size());
}

/// Local average of the responses over one cell, with the convention 0/0 = 0:
/// an empty cell yields exactly 0.
inline double local_average(const Dataset& data, const Cell& cell) {
    if (data.d != cell_dim(cell))
        throw std::invalid_argument("local_average: dimension mismatch");
    std::vector<double> ys;
    for (std::size_t i = 0; i < data.n(); ++i)
        if (cell_contains(cell, data.row(i))) ys.push_back(data.y[i]);
    return stable_mean(ys);
}

/// Empirical mass P_n(cell) = #{i : x_i in cell} / n.
inline double empirical_mass(const Dataset& data, const Cell& cell) {
    if (data.n() == 0) throw std::invalid_argument("empirical_mass: empty dataset");
    if (data.d != cell_dim(cell))
        throw std::invalid_argument("empirical_mass: dimension mismatch");
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < data.n(); ++i)
        if (cell_contains(cell, data.row(i))) ++cnt;
    return static_cast<double>(cnt) / static_cast<double>(data.n());
}

/// Monte Carlo geometry estimate for a Voronoi cell (no closed form in
/// d >= 2). The diameter estimate is the max pairwise distance among in-cell
/// samples, a lower bound on the true diameter.
struct VoronoiEstimate {
    double volume_est = 0.0;
    double diameter_est = 0.0;
    double std_err = 0.0;
    bool degenerate = false; ///< no sample landed in the cell
};

/// Monte Carlo estimate of the volume of ball-and-domain intersection, for
/// boundary diagnostics. Reported ball volumes are never clipped; this
/// helper quantifies how much of a near-boundary ball actually lies inside.
inline double clipped_ball_volume(const BallCell& ball, const HyperRect& domain, int n_mc,
                                  std::uint64_t seed) {
    if (n_mc < 100) throw std::invalid_argument("clipped_ball_volume: n_mc must be >= 100");
    if (domain.dim() != ball.dim())
        throw std::invalid_argument("clipped_ball_volume: dimension mismatch");
    Rng rng(seed);
    const int d = ball.dim();
    std::vector<double> p(d);
    int hits = 0;
    for (int t = 0; t < n_mc; ++t) {
        // sample inside the ball's bounding box, count domain-and-ball hits
        for (int k = 0; k < d; ++k)
            p[k] = ball.center[k] + ball.radius * (2.0 * rng.uniform() - 1.0);
        if (ball.contains(p) && domain.contains(p)) ++hits;
    }
    const double box = powint(2.0 * ball.radius, d);
    return box * static_cast<double>(hits) / static_cast<double>(n_mc);
}

inline VoronoiEstimate voronoi_cell_estimate(const VoronoiCellRef& cell,
                                             const HyperRect& domain, int n_mc,
                                             std::uint64_t seed) {
    if (n_mc < 100) throw std::invalid_argument("voronoi_cell_estimate: n_mc must be >= 100");
    if (domain.dim() != cell.d)
        throw std::invalid_argument("voronoi_cell_estimate: dimension mismatch");
    Rng rng(seed);
    const int d = cell.d;
    std::vector<double> inside; // hit points, row-major
    std::vector<double> p(d);
    for (int t = 0; t < n_mc; ++t) {
        for (int k = 0; k < d; ++k) p[k] = domain.lower[k] + domain.side(k) * rng.uniform();
        if (cell.contains(p)) inside.insert(inside.end(), p.begin(), p.end());
    }
    const std::size_t hits = inside.size() / static_cast<std::size_t>(d);
    const double frac = static_cast<double>(hits) / static_cast<double>(n_mc);
    VoronoiEstimate out;
    out.volume_est = domain.volume() * frac;
    out.std_err = domain.volume() * std::sqrt(frac * (1.0 - frac) / static_cast<double>(n_mc));
    if (hits == 0) {
        out.degenerate = true;
        return out;
    }
    double best = 0.0;
    for (std::size_t i = 0; i < hits; ++i) {
        std::span<const double> a{inside.data() + i * d, static_cast<std::size_t>(d)};
        for (std::size_t j = i + 1; j < hits; ++j) {
            std::span<const double> b{inside.data() + j * d, static_cast<std::size_t>(d)};
            best = std::max(best, squared_distance(a, b));
        }
    }
    out.diameter_est = std::sqrt(best);
    return out;
}

} // namespace shapereg
