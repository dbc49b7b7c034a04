#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "shapereg/geometry.hpp"

namespace shapereg {

// Closed-form evaluators for the deviation bounds and thresholds. Constants
// are implemented with their exact constants, no tightening; everything is
// computed in log space so the evaluators stay finite for n up to 1e9 and
// VC dimensions up to 1e3. Where a tuning rule fixes a choice only up to
// proportionality, the evaluators use constant 1.

namespace detail {
inline void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("bounds: delta must lie in (0,1)");
}
/// log((n+1)^v / delta) without forming the power.
inline double log_shatter_over_delta(double n, double v, double delta) {
    return v * std::log(n + 1.0) + std::log(1.0 / delta);
}
} // namespace detail

struct ShatteringBound {
    double log_value; ///< log (n+1)^v
    double value;     ///< (n+1)^v, +inf when not representable
};

/// Sauer bound on the shattering coefficient: S(n) <= (n+1)^v.
inline ShatteringBound shattering_bound(double n, double v) {
    if (n < 1 || v < 1) throw std::invalid_argument("shattering_bound: need n >= 1, v >= 1");
    const double lv = v * std::log(n + 1.0);
    return {lv, lv > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(lv)};
}

/// Uniform bound on sum eps_i 1_cell / sqrt(count): sqrt(2 sigma^2 log((n+1)^v/delta)).
inline double variance_bound(double sigma2, double n, double v, double delta) {
    detail::check_delta(delta);
    return std::sqrt(2.0 * sigma2 * detail::log_shatter_over_delta(n, v, delta));
}

/// Pointwise bound in terms of the empirical cell mass.
inline double pointwise_bound_general(double sigma2, double n, double v, double delta,
                                      double pn, double lip, double diam) {
    detail::check_delta(delta);
    if (!(pn > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 * sigma2 * detail::log_shatter_over_delta(n, v, delta) / (n * pn)) +
           lip * diam;
}

/// Pointwise bound in terms of the cell volume and the mass floor ell.
inline double pointwise_bound_mass(double sigma2, double n, double v, double delta,
                                   double ell, double vol, double lip, double diam) {
    detail::check_delta(delta);
    if (!(ell * vol > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(3.0 * sigma2 * detail::log_shatter_over_delta(n, v, delta) /
                     (n * ell * vol)) +
           lip * diam;
}

/// A cell is (delta,n)-large when n * max(P_n, P) meets this threshold.
inline double delta_n_large_threshold(double n, double v, double delta) {
    detail::check_delta(delta);
    return 8.0 * (std::log(4.0) + v * std::log(2.0 * n + 1.0) + std::log(1.0 / delta));
}

struct KnnBound {
    double value;
    bool k_large_enough;  ///< k >= 8 log(4 (2n+1)^{d+1} / delta)
    bool k_small_enough;  ///< 2k <= T0^d n ell
};

inline KnnBound knn_bound(double sigma2, double n, int d, double delta, double k,
                          double ell, double lip, double t0 = 1.0) {
    detail::check_delta(delta);
    if (!(k >= 1.0)) throw std::invalid_argument("knn_bound: k must be >= 1");
    const double dd = static_cast<double>(d);
    const double value =
        std::sqrt(2.0 * sigma2 * detail::log_shatter_over_delta(n, dd + 1.0, delta) / k) +
        2.0 * std::pow(2.0 * k / (n * ell), 1.0 / dd) * lip;
    const double need = 8.0 * (std::log(4.0) + (dd + 1.0) * std::log(2.0 * n + 1.0) +
                               std::log(1.0 / delta));
    return {value, k >= need, 2.0 * k <= powint(t0, d) * n * ell};
}

struct CartBound {
    double value;
    bool m_large_enough; ///< m >= 4 log(4 (2n+1)^{2d} / delta)
};

inline CartBound cart_bound(double sigma2, double n, int d, double delta, double m,
                            double beta, double b, double lip) {
    detail::check_delta(delta);
    if (!(m >= 1.0)) throw std::invalid_argument("cart_bound: m must be >= 1");
    const double dd = static_cast<double>(d);
    const double value =
        std::sqrt(2.0 * sigma2 * detail::log_shatter_over_delta(n, 2.0 * dd, delta) / m) +
        lip * beta * std::sqrt(dd) * std::pow(5.0 * m / (n * b), 1.0 / dd);
    const double need =
        4.0 * (std::log(4.0) + 2.0 * dd * std::log(2.0 * n + 1.0) + std::log(1.0 / delta));
    return {value, m >= need};
}

/// psi_d = (18 M d)^d (c_d b)^{-d}, in log space.
inline double proto_psi(int d, double density_max, double b, double cd) {
    return std::exp(d * std::log(18.0 * density_max * d / (cd * b)));
}

struct ProtoBound {
    double value;
    bool ratio_ok;    ///< n/m >= 8 psi_d log(1/delta) / delta^d
    bool m_large_enough; ///< 32 d log(12m/delta) <= T0^d m b c_d V_d
};

inline ProtoBound proto_bound(double sigma2, double n, double m, int d, double delta,
                              double density_max, double b, double cd, double lip,
                              double t0 = 1.0) {
    detail::check_delta(delta);
    if (!(m >= 3.0)) throw std::invalid_argument("proto_bound: m must be >= 3");
    const double dd = static_cast<double>(d);
    const double psi = proto_psi(d, density_max, b, cd);
    const double vd = unit_ball_volume(d);
    const double value =
        std::sqrt(4.0 * sigma2 * psi * std::log(1.0 / delta) / powint(delta, d)) *
            std::sqrt(m / n) +
        2.0 * lip * std::pow(32.0 * dd * std::log(12.0 * m / delta) / (m * b * cd * vd), 1.0 / dd);
    const bool ratio_ok = n / m >= 8.0 * psi * std::log(1.0 / delta) / powint(delta, d);
    const bool m_ok = 32.0 * dd * std::log(12.0 * m / delta) <= powint(t0, d) * m * b * cd * vd;
    return {value, ratio_ok, m_ok};
}

struct OptiNetBound {
    double value;
    bool m_large_enough; ///< 32 d log(12m/delta) <= T0^d m b c_d V_d
    bool eta_small_enough; ///< eta <= 2 T0
    bool n_large_enough; ///< n b V_d c_d eta^d >= 2^{d+3} log(1/delta)
};

inline OptiNetBound optinet_bound(double sigma2, double n, double m, int d, double delta,
                                  double b, double cd, double eta, double lip,
                                  double t0 = 1.0) {
    detail::check_delta(delta);
    if (!(m >= 1.0) || !(eta > 0.0))
        throw std::invalid_argument("optinet_bound: need m >= 1 and eta > 0");
    const double dd = static_cast<double>(d);
    const double vd = unit_ball_volume(d);
    const double value =
        std::sqrt(std::exp2(dd + 2.0) * sigma2 * std::log(1.0 / delta) /
                  (n * b * vd * cd * powint(eta, d))) +
        2.0 * lip *
            (eta + std::pow(32.0 * dd * std::log(12.0 * m / delta) / (m * b * cd * vd), 1.0 / dd));
    return {value, 32.0 * dd * std::log(12.0 * m / delta) <= powint(t0, d) * m * b * cd * vd,
            eta <= 2.0 * t0,
            n * b * vd * cd * powint(eta, d) >= std::exp2(dd + 3.0) * std::log(1.0 / delta)};
}

/// c_{delta,d} = log(1/delta) (d / log(1/(1-delta)))^d.
inline double mondrian_c(double delta, int d) {
    detail::check_delta(delta);
    return std::log(1.0 / delta) * powint(d / std::log(1.0 / (1.0 - delta)), d);
}

struct MondrianBound {
    double value;
    bool n_large_enough; ///< n^{2/(d+2)} b >= 8 c_{delta,d}
};

/// Proof-level pre-optimization form with the lifetime explicit; minimizing
/// over the lifetime recovers the n^{1/(d+2)} order.
inline MondrianBound mondrian_bound(double sigma2, double n, int d, double delta, double b,
                                    double lifetime, double lip) {
    detail::check_delta(delta);
    if (!(lifetime > 0.0)) throw std::invalid_argument("mondrian_bound: lifetime must be > 0");
    const double dd = static_cast<double>(d);
    const double c = mondrian_c(delta, d);
    const double value = std::sqrt(4.0 * sigma2 * c * powint(lifetime, d) / (n * b)) +
                         5.0 * std::sqrt(dd) * lip * std::log(dd / delta) / lifetime;
    return {value, std::pow(n, 2.0 / (dd + 2.0)) * b >= 8.0 * c};
}

/// Multiplicative Chernoff factors: with probability 1-delta each,
/// P_n >= lower * P and P_n <= upper * P. delta = 1 is allowed and gives the
/// vacuous factors (1, 1).
inline double chernoff_lower(double n_mu, double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("chernoff_lower: delta must lie in (0,1]");
    if (!(n_mu > 0.0)) throw std::invalid_argument("chernoff_lower: n*mu must be > 0");
    return 1.0 - std::sqrt(2.0 * std::log(1.0 / delta) / n_mu);
}

inline double chernoff_upper(double n_mu, double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("chernoff_upper: delta must lie in (0,1]");
    if (!(n_mu > 0.0)) throw std::invalid_argument("chernoff_upper: n*mu must be > 0");
    return 1.0 + std::sqrt(3.0 * std::log(1.0 / delta) / n_mu);
}

enum class PrtTailKind { UniformDiamUp, UniformDiamDown, UniformVol, CenteredDiam };

inline PrtTailKind prt_tail_kind_from_name(const std::string& s) {
    if (s == "uniform_diam_up") return PrtTailKind::UniformDiamUp;
    if (s == "uniform_diam_down") return PrtTailKind::UniformDiamDown;
    if (s == "uniform_vol") return PrtTailKind::UniformVol;
    if (s == "centered_diam") return PrtTailKind::CenteredDiam;
    throw std::invalid_argument("unknown PRT tail kind '" + s + "'");
}

struct PrtTailBound {
    double tail;      ///< probability bound
    double threshold; ///< event threshold on diameter or volume
    bool event_is_lower; ///< event is {quantity <= threshold}
};

/// Tail transcriptions for purely random tree cells after N splits.
/// uniform_diam_up:  P(diam >= sqrt(d) e^{-N/d + N theta}) <= d e^{-N d theta^2 / 4}
/// uniform_diam_down:P(diam <= sqrt(d) e^{-N/d - N theta}) <= d e^{-N d theta^2 / 8}
/// uniform_vol:      P(vol <=/>= e^{-alpha N}) <= (alpha e^{1-alpha})^N
///                   (lower tail for alpha > 1, upper tail for alpha in (0,1))
/// centered_diam:    P(diam >=/<= sqrt(d) 2^{-alpha N}) <= d (1-(1-theta)/d)^N theta^{-alpha N}
///                   with theta = (d-1) alpha / (1-alpha)
inline PrtTailBound prt_tail_bounds(PrtTailKind kind, int n_splits, int d, double parameter) {
    if (n_splits < 1 || d < 1) throw std::invalid_argument("prt_tail_bounds: bad N or d");
    const double N = static_cast<double>(n_splits);
    const double dd = static_cast<double>(d);
    switch (kind) {
    case PrtTailKind::UniformDiamUp: {
        if (!(parameter >= 0.0))
            throw std::invalid_argument("prt_tail_bounds: theta must be >= 0");
        return {dd * std::exp(-N * dd * parameter * parameter / 4.0),
                std::sqrt(dd) * std::exp(-N / dd + N * parameter), false};
    }
    case PrtTailKind::UniformDiamDown: {
        if (!(parameter > 0.0 && parameter < 2.0 / dd))
            throw std::invalid_argument("prt_tail_bounds: theta must lie in (0, 2/d)");
        return {dd * std::exp(-N * dd * parameter * parameter / 8.0),
                std::sqrt(dd) * std::exp(-N / dd - N * parameter), true};
    }
    case PrtTailKind::UniformVol: {
        if (!(parameter > 0.0) || parameter == 1.0)
            throw std::invalid_argument("prt_tail_bounds: alpha must be positive and != 1");
        const double tail = std::exp(N * (std::log(parameter) + 1.0 - parameter));
        return {tail, std::exp(-parameter * N), parameter > 1.0};
    }
    case PrtTailKind::CenteredDiam: {
        if (d < 2) throw std::invalid_argument("prt_tail_bounds: centered_diam needs d >= 2");
        if (!(parameter > 0.0 && parameter < 1.0) || parameter == 1.0 / dd)
            throw std::invalid_argument(
                "prt_tail_bounds: alpha must lie in (0,1/d) or (1/d,1)");
        const double theta = (dd - 1.0) * parameter / (1.0 - parameter);
        const double tail = dd * std::exp(N * std::log(1.0 - (1.0 - theta) / dd) -
                                          parameter * N * std::log(theta));
        return {tail, std::sqrt(dd) * std::exp2(-parameter * N), parameter > 1.0 / dd};
    }
    }
    throw std::invalid_argument("prt_tail_bounds: unknown kind");
}

struct SrRateBound {
    double constant;    ///< sqrt(3 sigma^2 / ell) + lip * gamma^{1/d}
    double rate_factor; ///< (log((n+1)^v / delta) / n)^{1/(d+2)}
};

/// Rate bound for a gamma-SR local map with tuned cell volume. The universal
/// constant in front of the rate is not invented; the two explicit factors
/// are reported separately.
inline SrRateBound sr_rate_bound(double sigma2, double ell, double lip, double gamma,
                                 int d, double n, double v, double delta) {
    detail::check_delta(delta);
    const double dd = static_cast<double>(d);
    return {std::sqrt(3.0 * sigma2 / ell) + lip * std::pow(gamma, 1.0 / dd),
            std::pow(detail::log_shatter_over_delta(n, v, delta) / n, 1.0 / (dd + 2.0))};
}

} // namespace shapereg
