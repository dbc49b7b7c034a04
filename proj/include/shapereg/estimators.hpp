#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "shapereg/core.hpp"
#include "shapereg/dataset.hpp"
#include "shapereg/geometry.hpp"
#include "shapereg/rng.hpp"
#include "shapereg/synth.hpp"

namespace shapereg {

enum class Method {
    FixedPartition,
    KNN,
    ProtoNN,
    OptiNet,
    CartLike,
    CenteredTree,
    UniformTree,
    Mondrian
};

inline const char* method_name(Method m) {
    switch (m) {
    case Method::FixedPartition: return "fixed_partition";
    case Method::KNN: return "knn";
    case Method::ProtoNN: return "proto_nn";
    case Method::OptiNet: return "optinet";
    case Method::CartLike: return "cart_like";
    case Method::CenteredTree: return "centered_tree";
    case Method::UniformTree: return "uniform_tree";
    case Method::Mondrian: return "mondrian";
    }
    return "?";
}

/// A split: coordinate p and relative position u in (0,1) along that side.
struct SplitSpec {
    int p = -1;
    double u = 0.0;
};

struct TreeNode {
    HyperRect rect;
    int left = -1; ///< child index; -1 marks a leaf
    int right = -1;
    SplitSpec split;
    double split_at = std::numeric_limits<double>::quiet_NaN(); ///< absolute threshold
    double split_time = std::numeric_limits<double>::quiet_NaN(); ///< Mondrian clock
    std::vector<std::uint32_t> samples; ///< leaf: training indices inside rect
    double leaf_value = 0.0;
    bool fallback = false; ///< leaf orphaned below the m-constraint by a fallback split

    bool is_leaf() const { return left < 0; }
};

struct XLawSpec {
    XLaw law = XLaw::Uniform01;
    double param = 1.0;
};

/// Pluggable split cost. The split carries the relative position; the
/// absolute threshold is cell.lower[p] + u * side(p).
using CostFn = std::function<double(const Dataset&, const HyperRect&, const SplitSpec&)>;

/// A fitted local-averaging estimator: enough state to produce cell_of(x)
/// and predict(x) for any query point. Immutable once fitted.
struct LocalModel {
    Method method = Method::FixedPartition;
    int d = 1;
    Dataset data;

    // fixed partition
    std::vector<std::vector<double>> cuts;
    std::vector<double> grid_value;
    std::vector<std::size_t> grid_count;

    // k-NN
    int k = 0;

    // Proto-NN / OptiNet
    std::shared_ptr<const std::vector<double>> sites; ///< Voronoi sites, row-major
    std::size_t n_sites = 0;
    std::vector<double> site_value;
    std::vector<std::size_t> site_count;
    std::shared_ptr<const std::vector<double>> drawn_prototypes; ///< OptiNet: the raw draw
    std::size_t n_drawn = 0;
    std::vector<std::uint32_t> net_indices; ///< OptiNet: kept prototype indices
    double eta = 0.0;

    // trees
    std::vector<TreeNode> tree;
    int levels = 0;      ///< centered/uniform: number of split rounds N
    double lifetime = 0; ///< Mondrian lifetime
    double beta = 0.0;   ///< CART-like shape constraint
    int m_min = 0;       ///< CART-like minimum leaf mass

    bool is_tree() const {
        return method == Method::CartLike || method == Method::CenteredTree ||
               method == Method::UniformTree || method == Method::Mondrian;
    }

    int leaf_index_of(std::span<const double> x) const {
        int node = 0;
        while (!tree[node].is_leaf())
            node = (x[tree[node].split.p] <= tree[node].split_at) ? tree[node].left
                                                                  : tree[node].right;
        return node;
    }

    std::size_t grid_index_of(std::span<const double> x) const {
        std::size_t idx = 0, stride = 1;
        for (int kk = 0; kk < d; ++kk) {
            const auto& ck = cuts[kk];
            const std::size_t bin =
                std::lower_bound(ck.begin(), ck.end(), x[kk]) - ck.begin();
            idx += bin * stride;
            stride *= ck.size() + 1;
        }
        return idx;
    }

    HyperRect grid_rect_of(std::size_t flat) const {
        std::vector<double> lo(d), up(d);
        for (int kk = 0; kk < d; ++kk) {
            const auto& ck = cuts[kk];
            const std::size_t bins = ck.size() + 1;
            const std::size_t bin = flat % bins;
            flat /= bins;
            lo[kk] = bin == 0 ? 0.0 : ck[bin - 1];
            up[kk] = bin == ck.size() ? 1.0 : ck[bin];
        }
        return HyperRect(std::move(lo), std::move(up), true);
    }

    std::size_t nearest_site_index(std::span<const double> x) const {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_sites; ++j) {
            std::span<const double> s{sites->data() + j * static_cast<std::size_t>(d),
                                      static_cast<std::size_t>(d)};
            const double d2 = squared_distance(s, x);
            if (d2 <= best_d2) { // ties favor the larger index
                best_d2 = d2;
                best = j;
            }
        }
        return best;
    }

    /// k-NN radius: the k-th smallest distance from x to the sample.
    double knn_radius(std::span<const double> x) const {
        std::vector<double> d2(data.n());
        for (std::size_t i = 0; i < data.n(); ++i)
            d2[i] = squared_distance(data.row(i), x);
        std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
        return std::sqrt(d2[k - 1]);
    }

    Cell cell_of(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != d)
            throw std::invalid_argument("cell_of: dimension mismatch");
        switch (method) {
        case Method::FixedPartition: return grid_rect_of(grid_index_of(x));
        case Method::KNN: return BallCell{std::vector<double>(x.begin(), x.end()), knn_radius(x)};
        case Method::ProtoNN:
        case Method::OptiNet:
            return VoronoiCellRef{sites, n_sites, d, nearest_site_index(x)};
        default: return tree[leaf_index_of(x)].rect;
        }
    }

    double predict(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != d)
            throw std::invalid_argument("predict: dimension mismatch");
        switch (method) {
        case Method::FixedPartition: return grid_value[grid_index_of(x)];
        case Method::KNN: {
            const double r = knn_radius(x);
            std::vector<double> ys;
            for (std::size_t i = 0; i < data.n(); ++i)
                if (std::sqrt(squared_distance(data.row(i), x)) <= r) ys.push_back(data.y[i]);
            return stable_mean(ys);
        }
        case Method::ProtoNN:
        case Method::OptiNet: return site_value[nearest_site_index(x)];
        default: return tree[leaf_index_of(x)].leaf_value;
        }
    }

    /// Leaf cells of a partition-based model, in enumeration order.
    std::vector<HyperRect> leaf_cells() const {
        std::vector<HyperRect> out;
        if (method == Method::FixedPartition) {
            std::size_t total = 1;
            for (const auto& ck : cuts) total *= ck.size() + 1;
            out.reserve(total);
            for (std::size_t i = 0; i < total; ++i) out.push_back(grid_rect_of(i));
        } else if (is_tree()) {
            for (const auto& nd : tree)
                if (nd.is_leaf()) out.push_back(nd.rect);
        } else {
            throw std::invalid_argument("leaf_cells: model has no finite partition");
        }
        return out;
    }
};

namespace detail {

inline double leaf_mean(const Dataset& data, const std::vector<std::uint32_t>& idx) {
    std::vector<double> ys;
    ys.reserve(idx.size());
    for (auto i : idx) ys.push_back(data.y[i]);
    return stable_mean(ys);
}

inline std::vector<double> draw_points(std::size_t m, int d, const XLawSpec& law, Rng& rng) {
    std::vector<double> pts;
    pts.reserve(m * static_cast<std::size_t>(d));
    for (std::size_t j = 0; j < m; ++j)
        for (int kk = 0; kk < d; ++kk)
            pts.push_back(detail::draw_coord(law.law, law.param, rng));
    return pts;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Fixed hyper-rectangle partition
// ---------------------------------------------------------------------------

inline LocalModel fit_fixed_partition(const Dataset& data,
                                      std::vector<std::vector<double>> cuts_per_dim) {
    data.validate();
    if (static_cast<int>(cuts_per_dim.size()) != data.d)
        throw std::invalid_argument("fit_fixed_partition: need one cut list per dimension");
    for (const auto& ck : cuts_per_dim) {
        for (std::size_t j = 0; j < ck.size(); ++j) {
            if (!(ck[j] > 0.0 && ck[j] < 1.0))
                throw std::invalid_argument("fit_fixed_partition: cuts must lie in (0,1)");
            if (j > 0 && !(ck[j] > ck[j - 1]))
                throw std::invalid_argument("fit_fixed_partition: cuts must be strictly increasing");
        }
    }
    LocalModel m;
    m.method = Method::FixedPartition;
    m.d = data.d;
    m.data = data;
    m.cuts = std::move(cuts_per_dim);
    std::size_t total = 1;
    for (const auto& ck : m.cuts) total *= ck.size() + 1;
    std::vector<std::vector<double>> bucket(total);
    for (std::size_t i = 0; i < data.n(); ++i)
        bucket[m.grid_index_of(data.row(i))].push_back(data.y[i]);
    m.grid_value.resize(total);
    m.grid_count.resize(total);
    for (std::size_t c = 0; c < total; ++c) {
        m.grid_count[c] = bucket[c].size();
        m.grid_value[c] = stable_mean(bucket[c]);
    }
    return m;
}

// ---------------------------------------------------------------------------
// k nearest neighbors
// ---------------------------------------------------------------------------

inline LocalModel fit_knn(const Dataset& data, int k) {
    data.validate();
    if (k < 1 || static_cast<std::size_t>(k) > data.n())
        throw std::invalid_argument("fit_knn: k must satisfy 1 <= k <= n");
    LocalModel m;
    m.method = Method::KNN;
    m.d = data.d;
    m.data = data;
    m.k = k;
    return m;
}

/// k of order n^{2/(d+2)} log((n+1)^{d+1}/delta)^{d/(d+2)}, proportionality
/// constant 1, clamped to [1, n].
inline int choose_k(std::size_t n, int d, double delta) {
    if (n < 1) throw std::invalid_argument("choose_k: n must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("choose_k: delta in (0,1)");
    const double dd = static_cast<double>(d);
    const double loghood = (dd + 1.0) * std::log(static_cast<double>(n) + 1.0) + std::log(1.0 / delta);
    const double raw = std::pow(static_cast<double>(n), 2.0 / (dd + 2.0)) *
                       std::pow(loghood, dd / (dd + 2.0));
    const long long r = std::llround(raw);
    return static_cast<int>(std::clamp<long long>(r, 1, static_cast<long long>(n)));
}

// ---------------------------------------------------------------------------
// Prototype nearest neighbor rules
// ---------------------------------------------------------------------------

namespace detail {

inline void attach_site_stats(LocalModel& m) {
    std::vector<std::vector<double>> bucket(m.n_sites);
    for (std::size_t i = 0; i < m.data.n(); ++i)
        bucket[m.nearest_site_index(m.data.row(i))].push_back(m.data.y[i]);
    m.site_value.resize(m.n_sites);
    m.site_count.resize(m.n_sites);
    for (std::size_t j = 0; j < m.n_sites; ++j) {
        m.site_count[j] = bucket[j].size();
        m.site_value[j] = stable_mean(bucket[j]);
    }
}

} // namespace detail

/// Proto-NN from an explicit site list (m*d row-major). Useful when the
/// prototypes come from another source than the covariate law.
inline LocalModel fit_proto_nn_with_sites(const Dataset& data, std::vector<double> sites) {
    data.validate();
    if (sites.empty() || sites.size() % static_cast<std::size_t>(data.d) != 0)
        throw std::invalid_argument("fit_proto_nn_with_sites: bad site matrix");
    LocalModel m;
    m.method = Method::ProtoNN;
    m.d = data.d;
    m.data = data;
    m.n_sites = sites.size() / static_cast<std::size_t>(data.d);
    m.sites = std::make_shared<const std::vector<double>>(std::move(sites));
    detail::attach_site_stats(m);
    return m;
}

/// 1-NN rule on m prototypes drawn i.i.d. from prototype_law; prediction is
/// the local average of the original data over the prototype's Voronoi cell.
inline LocalModel fit_proto_nn(const Dataset& data, std::size_t m_protos, std::uint64_t seed,
                               XLawSpec prototype_law = {}) {
    data.validate();
    if (m_protos < 1) throw std::invalid_argument("fit_proto_nn: m must be >= 1");
    Rng rng(seed);
    return fit_proto_nn_with_sites(data,
                                   detail::draw_points(m_protos, data.d, prototype_law, rng));
}

/// Greedy maximal eta-net over an index-ordered point set: point j enters the
/// net iff its distance to every already-kept point exceeds eta.
inline std::vector<std::uint32_t> greedy_eta_net(const std::vector<double>& pts,
                                                 std::size_t m, int d, double eta) {
    std::vector<std::uint32_t> net;
    const double eta2 = eta * eta;
    for (std::size_t j = 0; j < m; ++j) {
        std::span<const double> zj{pts.data() + j * static_cast<std::size_t>(d),
                                   static_cast<std::size_t>(d)};
        bool take = true;
        for (auto t : net) {
            std::span<const double> zt{pts.data() + t * static_cast<std::size_t>(d),
                                       static_cast<std::size_t>(d)};
            if (!(squared_distance(zj, zt) > eta2)) {
                take = false;
                break;
            }
        }
        if (take) net.push_back(static_cast<std::uint32_t>(j));
    }
    return net;
}

/// Checks both halves of the eta-net property: separation (all pairwise
/// distances exceed eta) and maximality (no excluded point is farther than
/// eta from every member).
inline bool net_is_valid(const std::vector<double>& pts, std::size_t m, int d,
                         const std::vector<std::uint32_t>& subset, double eta) {
    if (subset.empty()) return m == 0;
    const double eta2 = eta * eta;
    auto at = [&](std::size_t j) {
        return std::span<const double>{pts.data() + j * static_cast<std::size_t>(d),
                                       static_cast<std::size_t>(d)};
    };
    for (std::size_t a = 0; a < subset.size(); ++a)
        for (std::size_t b = a + 1; b < subset.size(); ++b)
            if (!(squared_distance(at(subset[a]), at(subset[b])) > eta2)) return false;
    std::vector<bool> in(m, false);
    for (auto j : subset) in[j] = true;
    for (std::size_t j = 0; j < m; ++j) {
        if (in[j]) continue;
        bool covered = false;
        for (auto t : subset)
            if (!(squared_distance(at(j), at(t)) > eta2)) {
                covered = true;
                break;
            }
        if (!covered) return false;
    }
    return true;
}

inline LocalModel fit_optinet(const Dataset& data, std::size_t m_protos, double eta,
                              std::uint64_t seed, XLawSpec prototype_law = {}) {
    data.validate();
    if (m_protos < 1) throw std::invalid_argument("fit_optinet: m must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("fit_optinet: eta must be > 0");
    LocalModel m;
    m.method = Method::OptiNet;
    m.d = data.d;
    m.data = data;
    m.eta = eta;
    Rng rng(seed);
    auto raw = std::make_shared<const std::vector<double>>(
        detail::draw_points(m_protos, data.d, prototype_law, rng));
    m.drawn_prototypes = raw;
    m.n_drawn = m_protos;
    m.net_indices = greedy_eta_net(*raw, m_protos, data.d, eta);
    std::vector<double> net_sites;
    net_sites.reserve(m.net_indices.size() * static_cast<std::size_t>(data.d));
    for (auto j : m.net_indices)
        net_sites.insert(net_sites.end(),
                         raw->begin() + j * static_cast<std::size_t>(data.d),
                         raw->begin() + (j + 1) * static_cast<std::size_t>(data.d));
    m.sites = std::make_shared<const std::vector<double>>(std::move(net_sites));
    m.n_sites = m.net_indices.size();
    detail::attach_site_stats(m);
    return m;
}

// ---------------------------------------------------------------------------
// CART-like regression tree
// ---------------------------------------------------------------------------

/// The CART regression cost of a split: sum over the two children of the mean
/// squared deviation from the child mean. Both children must hold at least
/// one sample point.
inline double cart_cost(const Dataset& data, const HyperRect& cell, const SplitSpec& split) {
    const double cut = cell.lower[split.p] + split.u * cell.side(split.p);
    std::vector<double> yl, yr;
    for (std::size_t i = 0; i < data.n(); ++i) {
        auto xi = data.row(i);
        if (!cell.contains(xi)) continue;
        (xi[split.p] <= cut ? yl : yr).push_back(data.y[i]);
    }
    if (yl.empty() || yr.empty())
        throw std::invalid_argument("cart_cost: empty child");
    auto term = [](std::vector<double>& ys) {
        double mean = 0.0;
        for (double v : ys) mean += v;
        mean /= static_cast<double>(ys.size());
        double sse = 0.0;
        for (double v : ys) sse += (v - mean) * (v - mean);
        return sse / static_cast<double>(ys.size());
    };
    return term(yl) + term(yr);
}

namespace detail {

struct CartCandidate {
    bool found = false;
    double cost = std::numeric_limits<double>::infinity();
    int p = -1;
    double u = 0.0;
    double cut = 0.0;
    std::size_t left_count = 0;
};

inline bool beta_ok_children(const HyperRect& cell, int p, double cut, double beta) {
    for (int side = 0; side < 2; ++side) {
        double hmin = std::numeric_limits<double>::infinity();
        double hmax = 0.0;
        for (int kk = 0; kk < cell.dim(); ++kk) {
            double s = kk == p ? (side == 0 ? cut - cell.lower[kk] : cell.upper[kk] - cut)
                               : cell.side(kk);
            hmin = std::min(hmin, s);
            hmax = std::max(hmax, s);
        }
        if (!(hmax <= beta * hmin)) return false;
    }
    return true;
}

} // namespace detail

/// Grows the constrained tree: while a cell admits a split giving both
/// children at least m points, it is split at the cost minimizer over the
/// beta-shape-regular, m-feasible candidates; if none of those exist the
/// largest side is cut in the middle. Children of such fallback cuts that
/// end below m points become flagged terminal leaves. Candidate positions
/// are midpoints between consecutive distinct in-cell sample coordinates,
/// where any piecewise-constant sample cost (like the CART cost) attains
/// every value it can take. Ties break on (cost, p, u).
inline LocalModel fit_cart_like(const Dataset& data, int m, double beta, CostFn cost = {}) {
    data.validate();
    if (m < 1 || static_cast<std::size_t>(m) > data.n())
        throw std::invalid_argument("fit_cart_like: m must satisfy 1 <= m <= n");
    if (!(beta >= 2.0)) throw std::invalid_argument("fit_cart_like: beta must be >= 2");

    LocalModel model;
    model.method = Method::CartLike;
    model.d = data.d;
    model.data = data;
    model.beta = beta;
    model.m_min = m;

    model.tree.push_back(TreeNode{});
    model.tree[0].rect = HyperRect::unit_cube(data.d, true);
    std::vector<std::uint32_t> all(data.n());
    std::iota(all.begin(), all.end(), 0u);

    struct Work {
        int node;
        std::vector<std::uint32_t> idx;
        bool frozen; ///< fallback child below m: becomes a leaf untouched
    };
    std::vector<Work> stack;
    stack.push_back({0, std::move(all), false});

    std::vector<std::pair<double, std::uint32_t>> order;
    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        TreeNode& nd = model.tree[w.node];
        const std::size_t cnt = w.idx.size();

        detail::CartCandidate best;
        bool m_feasible = false;
        if (!w.frozen && cnt >= 2 * static_cast<std::size_t>(m)) {
            for (int p = 0; p < data.d; ++p) {
                order.clear();
                order.reserve(cnt);
                for (auto i : w.idx) order.emplace_back(data.row(i)[p], i);
                std::sort(order.begin(), order.end());
                // prefix sums in sorted order for the default cost
                double sy = 0.0, sy2 = 0.0;
                double tot_y = 0.0, tot_y2 = 0.0;
                for (auto& [v, i] : order) {
                    tot_y += data.y[i];
                    tot_y2 += data.y[i] * data.y[i];
                }
                const double side = nd.rect.side(p);
                for (std::size_t t = 0; t + 1 < cnt; ++t) {
                    const double yi = data.y[order[t].second];
                    sy += yi;
                    sy2 += yi * yi;
                    if (!(order[t].first < order[t + 1].first)) continue;
                    const std::size_t nl = t + 1, nr = cnt - nl;
                    if (nl < static_cast<std::size_t>(m) || nr < static_cast<std::size_t>(m))
                        continue;
                    m_feasible = true;
                    const double cut = 0.5 * (order[t].first + order[t + 1].first);
                    if (!detail::beta_ok_children(nd.rect, p, cut, beta)) continue;
                    const double u = (cut - nd.rect.lower[p]) / side;
                    double c;
                    if (cost) {
                        c = cost(data, nd.rect, SplitSpec{p, u});
                    } else {
                        const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
                        c = (sy2 - sy * sy / dl) / dl +
                            ((tot_y2 - sy2) - (tot_y - sy) * (tot_y - sy) / dr) / dr;
                    }
                    if (c < best.cost ||
                        (c == best.cost && (p < best.p || (p == best.p && u < best.u)))) {
                        best = {true, c, p, u, cut, nl};
                    }
                }
            }
        }

        int split_p = -1;
        double split_cut = 0.0, split_u = 0.0;
        bool is_fallback_split = false;
        if (best.found) {
            split_p = best.p;
            split_cut = best.cut;
            split_u = best.u;
        } else if (m_feasible) {
            // S_m nonempty but no beta-regular candidate: cut the largest side
            // in the middle (always beta-regular for beta >= 2).
            split_p = 0;
            for (int p = 1; p < data.d; ++p)
                if (nd.rect.side(p) > nd.rect.side(split_p)) split_p = p;
            split_u = 0.5;
            split_cut = nd.rect.lower[split_p] + 0.5 * nd.rect.side(split_p);
            is_fallback_split = true;
        } else {
            nd.samples = std::move(w.idx);
            nd.leaf_value = detail::leaf_mean(data, nd.samples);
            nd.fallback = w.frozen;
            continue;
        }

        std::vector<std::uint32_t> li, ri;
        for (auto i : w.idx)
            (data.row(i)[split_p] <= split_cut ? li : ri).push_back(i);

        HyperRect lr = nd.rect, rr = nd.rect;
        lr.upper[split_p] = split_cut;
        rr.lower[split_p] = split_cut;
        const int lid = static_cast<int>(model.tree.size());
        // nd may dangle after push_back; write through the index
        model.tree[w.node].split = SplitSpec{split_p, split_u};
        model.tree[w.node].split_at = split_cut;
        model.tree[w.node].left = lid;
        model.tree[w.node].right = lid + 1;
        model.tree.push_back(TreeNode{});
        model.tree.push_back(TreeNode{});
        model.tree[lid].rect = std::move(lr);
        model.tree[lid + 1].rect = std::move(rr);
        const bool lfroze = is_fallback_split && li.size() < static_cast<std::size_t>(m);
        const bool rfroze = is_fallback_split && ri.size() < static_cast<std::size_t>(m);
        stack.push_back({lid + 1, std::move(ri), rfroze});
        stack.push_back({lid, std::move(li), lfroze});
    }
    return model;
}

// ---------------------------------------------------------------------------
// Purely random trees
// ---------------------------------------------------------------------------

namespace detail {

inline void attach_tree_samples(LocalModel& m) {
    std::vector<std::vector<std::uint32_t>> bucket(m.tree.size());
    for (std::size_t i = 0; i < m.data.n(); ++i)
        bucket[m.leaf_index_of(m.data.row(i))].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t nid = 0; nid < m.tree.size(); ++nid) {
        if (!m.tree[nid].is_leaf()) continue;
        m.tree[nid].samples = std::move(bucket[nid]);
        m.tree[nid].leaf_value = leaf_mean(m.data, m.tree[nid].samples);
    }
}

/// N rounds of splitting every current cell; split position is the midpoint
/// (centered) or uniform on the chosen side.
inline LocalModel fit_prt_rounds(const Dataset& data, int n_rounds, std::uint64_t seed,
                                 bool centered) {
    data.validate();
    if (n_rounds < 0) throw std::invalid_argument("purely random tree: N must be >= 0");
    LocalModel m;
    m.method = centered ? Method::CenteredTree : Method::UniformTree;
    m.d = data.d;
    m.data = data;
    m.levels = n_rounds;
    m.tree.push_back(TreeNode{});
    m.tree[0].rect = HyperRect::unit_cube(data.d, true);
    Rng rng(seed);
    std::vector<int> level{0};
    for (int r = 0; r < n_rounds; ++r) {
        std::vector<int> next;
        next.reserve(level.size() * 2);
        for (int nid : level) {
            const int p = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(data.d)));
            const double u = centered ? 0.5 : rng.uniform();
            const double lo = m.tree[nid].rect.lower[p];
            const double hi = m.tree[nid].rect.upper[p];
            const double cut = centered ? 0.5 * (lo + hi) : lo + (hi - lo) * u;
            HyperRect lr = m.tree[nid].rect, rr = m.tree[nid].rect;
            lr.upper[p] = cut;
            rr.lower[p] = cut;
            const int lid = static_cast<int>(m.tree.size());
            m.tree[nid].split = SplitSpec{p, u};
            m.tree[nid].split_at = cut;
            m.tree[nid].left = lid;
            m.tree[nid].right = lid + 1;
            m.tree.push_back(TreeNode{});
            m.tree.push_back(TreeNode{});
            m.tree[lid].rect = std::move(lr);
            m.tree[lid + 1].rect = std::move(rr);
            next.push_back(lid);
            next.push_back(lid + 1);
        }
        level = std::move(next);
    }
    attach_tree_samples(m);
    return m;
}

} // namespace detail

inline LocalModel fit_centered_tree(const Dataset& data, int n_rounds, std::uint64_t seed) {
    return detail::fit_prt_rounds(data, n_rounds, seed, true);
}

inline LocalModel fit_uniform_tree(const Dataset& data, int n_rounds, std::uint64_t seed) {
    return detail::fit_prt_rounds(data, n_rounds, seed, false);
}

/// Mondrian process partition MP(lifetime) on [0,1]^d. Each cell is assigned
/// a split time at rate sum of side lengths; cells whose time exceeds the
/// lifetime stay leaves; the split coordinate is chosen proportionally to
/// side length, the position uniformly. Nodes record their sampled clock, so
/// the root's split_time is the first split time of the unit cube.
inline LocalModel fit_mondrian(const Dataset& data, double lifetime, std::uint64_t seed) {
    data.validate();
    if (!(lifetime >= 0.0)) throw std::invalid_argument("fit_mondrian: lifetime must be >= 0");
    LocalModel m;
    m.method = Method::Mondrian;
    m.d = data.d;
    m.data = data;
    m.lifetime = lifetime;
    m.tree.push_back(TreeNode{});
    m.tree[0].rect = HyperRect::unit_cube(data.d, true);
    Rng rng(seed);

    struct Item {
        int node;
        double t0;
    };
    std::vector<Item> stack{{0, 0.0}};
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        double rate = 0.0;
        for (int kk = 0; kk < data.d; ++kk) rate += m.tree[it.node].rect.side(kk);
        const double t = it.t0 + rng.exponential(rate);
        m.tree[it.node].split_time = t;
        if (t > lifetime) continue; // leaf
        double pick = rng.uniform() * rate;
        int p = 0;
        for (; p < data.d - 1; ++p) {
            pick -= m.tree[it.node].rect.side(p);
            if (pick <= 0.0) break;
        }
        const double lo = m.tree[it.node].rect.lower[p];
        const double hi = m.tree[it.node].rect.upper[p];
        const double cut = lo + (hi - lo) * rng.uniform();
        HyperRect lr = m.tree[it.node].rect, rr = m.tree[it.node].rect;
        lr.upper[p] = cut;
        rr.lower[p] = cut;
        const int lid = static_cast<int>(m.tree.size());
        m.tree[it.node].split = SplitSpec{p, (cut - lo) / (hi - lo)};
        m.tree[it.node].split_at = cut;
        m.tree[it.node].left = lid;
        m.tree[it.node].right = lid + 1;
        m.tree.push_back(TreeNode{});
        m.tree.push_back(TreeNode{});
        m.tree[lid].rect = std::move(lr);
        m.tree[lid + 1].rect = std::move(rr);
        stack.push_back({lid + 1, t});
        stack.push_back({lid, t});
    }
    detail::attach_tree_samples(m);
    return m;
}

inline double predict(const LocalModel& m, std::span<const double> x) { return m.predict(x); }

} // namespace shapereg
