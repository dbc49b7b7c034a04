#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/dataset.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

enum class GKind { LinearSum, AdditiveSine, MaxAffine, Constant };
enum class NoiseKind { Gaussian, BoundedUniform, HeteroGaussian };
enum class XLaw { Uniform01, FlooredMixture };

/// A synthetic regression problem with analytically known regression
/// function, Lipschitz constant, sub-Gaussian noise parameter and a density
/// floor for the covariate law.
struct RegressionProblem {
    int d = 1;
    GKind g = GKind::LinearSum;
    double g_param = 1.0; ///< Constant: the constant c; AdditiveSine/MaxAffine: amplitude
    NoiseKind noise = NoiseKind::Gaussian;
    double noise_param = 1.0; ///< Gaussian: sigma; BoundedUniform: half-width a; Hetero: sigma_max
    XLaw x_law = XLaw::Uniform01;
    double x_law_param = 1.0; ///< FlooredMixture: density floor b in (0,1]

    /// Exact Lipschitz constant of g on [0,1]^d.
    double lipschitz() const {
        switch (g) {
        case GKind::LinearSum: return std::sqrt(static_cast<double>(d));
        case GKind::AdditiveSine:
            return g_param * 2.0 * 3.14159265358979323846 * std::sqrt(static_cast<double>(d));
        case GKind::MaxAffine: return g_param;
        case GKind::Constant: return 0.0;
        }
        return 0.0;
    }

    /// Sub-Gaussian parameter sigma^2 of the conditional noise law.
    double sigma2() const { return noise_param * noise_param; }

    /// Density floor b of the covariate law on [0,1]^d.
    double density_floor() const { return x_law == XLaw::Uniform01 ? 1.0 : x_law_param; }

    /// Range max g - min g over [0,1]^d; used by rate fits to spot
    /// pre-asymptotic transients.
    double g_range() const {
        switch (g) {
        case GKind::LinearSum: return static_cast<double>(d);
        case GKind::AdditiveSine: return 2.0 * g_param * static_cast<double>(d);
        case GKind::MaxAffine: return std::abs(g_param);
        case GKind::Constant: return 0.0;
        }
        return 0.0;
    }
};

/// Ground-truth regression function.
inline double eval_g(const RegressionProblem& p, std::span<const double> x) {
    if (static_cast<int>(x.size()) != p.d) throw std::invalid_argument("eval_g: bad dimension");
    for (double v : x)
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("eval_g: x outside [0,1]^d");
    switch (p.g) {
    case GKind::LinearSum: {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    case GKind::AdditiveSine: {
        double s = 0.0;
        for (double v : x) s += std::sin(2.0 * 3.14159265358979323846 * v);
        return p.g_param * s;
    }
    case GKind::MaxAffine: {
        double m = x[0];
        for (double v : x) m = std::max(m, v);
        return p.g_param * m;
    }
    case GKind::Constant: return p.g_param;
    }
    return 0.0;
}

namespace detail {

/// One covariate coordinate draw. FlooredMixture(b): uniform with probability
/// b, otherwise Beta(2,2) sampled as the median of three uniforms, so the
/// mixture density is b + (1-b) * 6t(1-t) >= b on [0,1].
inline double draw_coord(XLaw law, double b, Rng& rng) {
    if (law == XLaw::Uniform01) return rng.uniform();
    if (rng.uniform() < b) return rng.uniform();
    double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double lo = std::min(u1, std::min(u2, u3));
    const double hi = std::max(u1, std::max(u2, u3));
    return u1 + u2 + u3 - lo - hi;
}

inline double draw_noise(const RegressionProblem& p, std::span<const double> x, Rng& rng) {
    switch (p.noise) {
    case NoiseKind::Gaussian: return p.noise_param * rng.normal();
    case NoiseKind::BoundedUniform: return p.noise_param * (2.0 * rng.uniform() - 1.0);
    case NoiseKind::HeteroGaussian:
        return p.noise_param * (0.5 + 0.5 * x[0]) * rng.normal();
    }
    return 0.0;
}

} // namespace detail

/// Draw n i.i.d. pairs and also return the realized noise values; the
/// bound-verification experiments need oracle access to the epsilons.
struct OracleSample {
    Dataset data;
    std::vector<double> eps;
};

inline OracleSample generate_oracle(const RegressionProblem& p, std::size_t n,
                                    std::uint64_t seed) {
    if (p.d < 1) throw std::invalid_argument("generate: d must be >= 1");
    Rng rng(seed);
    OracleSample out;
    out.data.d = p.d;
    out.data.x.reserve(n * static_cast<std::size_t>(p.d));
    out.data.y.reserve(n);
    out.eps.reserve(n);
    std::vector<double> xi(p.d);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < p.d; ++k)
            xi[k] = detail::draw_coord(p.x_law, p.x_law_param, rng);
        const double e = detail::draw_noise(p, xi, rng);
        out.data.x.insert(out.data.x.end(), xi.begin(), xi.end());
        out.data.y.push_back(eval_g(p, xi) + e);
        out.eps.push_back(e);
    }
    return out;
}

/// n i.i.d. draws (X_i, Y_i) with Y = g(X) + eps; deterministic given seed.
inline Dataset generate(const RegressionProblem& p, std::size_t n, std::uint64_t seed) {
    return generate_oracle(p, n, seed).data;
}

} // namespace shapereg
