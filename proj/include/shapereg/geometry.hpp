#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace shapereg {

/// x^k by repeated multiplication. Scaling by powers of two stays exact,
/// which the ball-cell identity diam^d * V_d == 2^d * volume relies on.
inline double powint(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

/// Volume of the unit Euclidean ball in dimension d.
inline double unit_ball_volume(int d) {
    if (d < 1) throw std::invalid_argument("unit_ball_volume: d must be >= 1");
    return std::pow(3.14159265358979323846, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

/// Axis-aligned box. Partition elements use the lower-open convention
/// (lower, upper] per coordinate, except on faces lying on the domain
/// origin, which stay closed so that the leaves tile the closed cube.
/// Standalone rectangles default to closed containment.
struct HyperRect {
    std::vector<double> lower;
    std::vector<double> upper;
    bool lower_open = false;

    HyperRect() = default;
    HyperRect(std::vector<double> lo, std::vector<double> up, bool open_low = false)
        : lower(std::move(lo)), upper(std::move(up)), lower_open(open_low) {
        if (lower.size() != upper.size() || lower.empty())
            throw std::invalid_argument("HyperRect: bad bounds");
        for (std::size_t k = 0; k < lower.size(); ++k)
            if (!(lower[k] <= upper[k]))
                throw std::invalid_argument("HyperRect: lower > upper");
    }

    static HyperRect unit_cube(int d, bool open_low = false) {
        return HyperRect(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0), open_low);
    }

    int dim() const { return static_cast<int>(lower.size()); }
    double side(int k) const { return upper[k] - lower[k]; }

    double h_minus() const {
        double m = side(0);
        for (int k = 1; k < dim(); ++k) m = std::min(m, side(k));
        return m;
    }
    double h_plus() const {
        double m = side(0);
        for (int k = 1; k < dim(); ++k) m = std::max(m, side(k));
        return m;
    }
    double volume() const {
        double v = 1.0;
        for (int k = 0; k < dim(); ++k) v *= side(k);
        return v;
    }
    double diameter() const {
        double s = 0.0;
        for (int k = 0; k < dim(); ++k) s += side(k) * side(k);
        return std::sqrt(s);
    }

    bool contains(std::span<const double> p) const {
        for (int k = 0; k < dim(); ++k) {
            if (p[k] > upper[k]) return false;
            if (lower_open && lower[k] != 0.0) {
                if (!(p[k] > lower[k])) return false;
            } else {
                if (p[k] < lower[k]) return false;
            }
        }
        return true;
    }
};

struct RectGeometry {
    double h_minus;
    double h_plus;
    double volume;
    double diameter;
};

inline RectGeometry rect_geometry(const HyperRect& r) {
    return {r.h_minus(), r.h_plus(), r.volume(), r.diameter()};
}

/// Closed Euclidean ball; the k-NN cell B(x, tau_k(x)). Never clipped to the
/// domain: volume and diameter are those of the full ball.
struct BallCell {
    std::vector<double> center;
    double radius = 0.0;

    int dim() const { return static_cast<int>(center.size()); }
    double diameter() const { return 2.0 * radius; }
    double volume() const { return unit_ball_volume(dim()) * powint(radius, dim()); }

    // compares rounded distances, not squares: sqrt is monotone, so a radius
    // set to the k-th smallest distance keeps exactly the intended points
    bool contains(std::span<const double> p) const {
        return std::sqrt(squared_distance(center, p)) <= radius;
    }
};

/// One cell of the Voronoi diagram of a site set, by reference. Site rows are
/// shared so that cells stay cheap to copy. Ties go to the larger site index.
struct VoronoiCellRef {
    std::shared_ptr<const std::vector<double>> sites; ///< m*d row-major
    std::size_t m = 0;
    int d = 1;
    std::size_t index = 0;

    std::span<const double> site(std::size_t j) const {
        return {sites->data() + j * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }

    std::size_t nearest_site(std::span<const double> p) const {
        std::size_t best = 0;
        double best_d2 = squared_distance(site(0), p);
        for (std::size_t j = 1; j < m; ++j) {
            const double d2 = squared_distance(site(j), p);
            if (d2 <= best_d2) { // ties favor the larger index
                best_d2 = d2;
                best = j;
            }
        }
        return best;
    }

    bool contains(std::span<const double> p) const { return nearest_site(p) == index; }
};

using Cell = std::variant<HyperRect, BallCell, VoronoiCellRef>;

inline int cell_dim(const Cell& c) {
    return std::visit([](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, VoronoiCellRef>) return v.d;
        else return v.dim();
    }, c);
}

inline bool cell_contains(const Cell& c, std::span<const double> p) {
    return std::visit([&](const auto& v) { return v.contains(p); }, c);
}

} // namespace shapereg
