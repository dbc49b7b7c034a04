#pragma once

#include <json.hpp>

#include <memory>
#include <stdexcept>
#include <string>

#include "shapereg/estimators.hpp"

namespace shapereg {

// JSON form of a fitted model: method tag, dimension, the training sample,
// method parameters, and for tree methods the tree as nested objects. Leaf
// sample lists and per-cell averages are rebuilt on load by routing the
// stored sample, so a round trip reproduces predictions bit for bit.

namespace detail {

inline nlohmann::json tree_to_json(const LocalModel& m, int node) {
    const TreeNode& nd = m.tree[node];
    nlohmann::json j;
    j["lower"] = nd.rect.lower;
    j["upper"] = nd.rect.upper;
    if (!std::isnan(nd.split_time)) j["time"] = nd.split_time;
    if (nd.is_leaf()) {
        if (nd.fallback) j["fallback"] = true;
        return j;
    }
    j["split"] = {{"p", nd.split.p}, {"u", nd.split.u}, {"at", nd.split_at}};
    j["left"] = tree_to_json(m, nd.left);
    j["right"] = tree_to_json(m, nd.right);
    return j;
}

inline int tree_from_json(LocalModel& m, const nlohmann::json& j) {
    const int id = static_cast<int>(m.tree.size());
    m.tree.push_back(TreeNode{});
    m.tree[id].rect = HyperRect(j.at("lower").get<std::vector<double>>(),
                                j.at("upper").get<std::vector<double>>(), true);
    if (j.contains("time")) m.tree[id].split_time = j.at("time").get<double>();
    if (j.contains("fallback")) m.tree[id].fallback = j.at("fallback").get<bool>();
    if (j.contains("split")) {
        m.tree[id].split.p = j.at("split").at("p").get<int>();
        m.tree[id].split.u = j.at("split").at("u").get<double>();
        m.tree[id].split_at = j.at("split").at("at").get<double>();
        const int l = tree_from_json(m, j.at("left"));
        const int r = tree_from_json(m, j.at("right"));
        m.tree[id].left = l;
        m.tree[id].right = r;
    }
    return id;
}

} // namespace detail

inline nlohmann::json model_to_json(const LocalModel& m) {
    nlohmann::json j;
    j["schema"] = 1;
    j["method"] = method_name(m.method);
    j["d"] = m.d;
    j["data"] = {{"x", m.data.x}, {"y", m.data.y}};
    switch (m.method) {
    case Method::FixedPartition: j["cuts"] = m.cuts; break;
    case Method::KNN: j["k"] = m.k; break;
    case Method::ProtoNN:
        j["sites"] = *m.sites;
        break;
    case Method::OptiNet:
        j["prototypes"] = *m.drawn_prototypes;
        j["net"] = m.net_indices;
        j["eta"] = m.eta;
        break;
    case Method::CartLike:
        j["beta"] = m.beta;
        j["m"] = m.m_min;
        j["tree"] = detail::tree_to_json(m, 0);
        break;
    case Method::CenteredTree:
    case Method::UniformTree:
        j["levels"] = m.levels;
        j["tree"] = detail::tree_to_json(m, 0);
        break;
    case Method::Mondrian:
        j["lifetime"] = m.lifetime;
        j["tree"] = detail::tree_to_json(m, 0);
        break;
    }
    return j;
}

inline LocalModel model_from_json(const nlohmann::json& j) {
    if (j.at("schema").get<int>() != 1)
        throw std::invalid_argument("model_from_json: unsupported schema");
    const std::string tag = j.at("method").get<std::string>();
    LocalModel m;
    m.d = j.at("d").get<int>();
    m.data = Dataset(j.at("data").at("x").get<std::vector<double>>(),
                     j.at("data").at("y").get<std::vector<double>>(), m.d);
    if (tag == "fixed_partition") {
        return fit_fixed_partition(m.data, j.at("cuts").get<std::vector<std::vector<double>>>());
    }
    if (tag == "knn") {
        return fit_knn(m.data, j.at("k").get<int>());
    }
    if (tag == "proto_nn") {
        m.method = Method::ProtoNN;
        auto s = std::make_shared<const std::vector<double>>(
            j.at("sites").get<std::vector<double>>());
        m.n_sites = s->size() / static_cast<std::size_t>(m.d);
        m.sites = s;
        detail::attach_site_stats(m);
        return m;
    }
    if (tag == "optinet") {
        m.method = Method::OptiNet;
        m.eta = j.at("eta").get<double>();
        auto raw = std::make_shared<const std::vector<double>>(
            j.at("prototypes").get<std::vector<double>>());
        m.drawn_prototypes = raw;
        m.n_drawn = raw->size() / static_cast<std::size_t>(m.d);
        m.net_indices = j.at("net").get<std::vector<std::uint32_t>>();
        std::vector<double> net_sites;
        for (auto t : m.net_indices)
            net_sites.insert(net_sites.end(),
                             raw->begin() + t * static_cast<std::size_t>(m.d),
                             raw->begin() + (t + 1) * static_cast<std::size_t>(m.d));
        m.sites = std::make_shared<const std::vector<double>>(std::move(net_sites));
        m.n_sites = m.net_indices.size();
        detail::attach_site_stats(m);
        return m;
    }
    if (tag == "cart_like") {
        m.method = Method::CartLike;
        m.beta = j.at("beta").get<double>();
        m.m_min = j.at("m").get<int>();
    } else if (tag == "centered_tree" || tag == "uniform_tree") {
        m.method = tag == "centered_tree" ? Method::CenteredTree : Method::UniformTree;
        m.levels = j.at("levels").get<int>();
    } else if (tag == "mondrian") {
        m.method = Method::Mondrian;
        m.lifetime = j.at("lifetime").get<double>();
    } else {
        throw std::invalid_argument("model_from_json: unknown method '" + tag + "'");
    }
    detail::tree_from_json(m, j.at("tree"));
    detail::attach_tree_samples(m);
    return m;
}

} // namespace shapereg
