#include "atelier/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace atelier {

namespace {

// Pruning slack absorbs rounding in the triangle inequality; it only widens the search.
constexpr double kPruneSlack = 1e-9;

void check_query(std::size_t dim, std::span<const double> q, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw DomainError("query radius must be finite and positive");
    }
    if (q.size() != dim) {
        throw DomainError("query has dimension " + std::to_string(q.size()) + ", index has " +
                          std::to_string(dim));
    }
}

}  // namespace

IndexBackend parse_backend(const std::string& name) {
    if (name == "brute") return IndexBackend::Brute;
    if (name == "tree") return IndexBackend::Tree;
    if (name == "auto") return IndexBackend::Auto;
    throw DomainError("unknown index backend \"" + name + "\" (expected brute, tree or auto)");
}

const char* backend_name(IndexBackend backend) {
    switch (backend) {
        case IndexBackend::Brute: return "brute";
        case IndexBackend::Tree: return "tree";
        case IndexBackend::Auto: return "auto";
    }
    return "auto";
}

std::vector<std::size_t> brute_force_radius(const PointMatrix& points, std::span<const double> q,
                                            double eps) {
    std::vector<std::size_t> out;
    if (points.empty()) {
        return out;
    }
    check_query(points.dim(), q, eps);
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (detail::distance_unchecked(points.row(j), q) <= eps) {
            out.push_back(j);
        }
    }
    return out;
}

VpTree::VpTree(PointMatrix points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw DomainError("too many points for a VpTree");
    }
    order_.resize(points_.size());
    for (std::uint32_t i = 0; i < order_.size(); ++i) {
        order_[i] = i;
    }
    if (!order_.empty()) {
        root_ = build(0, static_cast<std::uint32_t>(order_.size()));
    }
}

std::int32_t VpTree::build(std::uint32_t lo, std::uint32_t hi) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    if (hi - lo <= leaf_size_) {
        nodes_[id].bucket_begin = lo;
        nodes_[id].bucket_end = hi;
        return id;
    }

    // The first point of the range is the vantage point; the rest split at the median
    // distance. Ties break on point index so the layout depends only on input order.
    const std::uint32_t vantage = order_[lo];
    std::vector<std::pair<double, std::uint32_t>> keyed;
    keyed.reserve(hi - lo - 1);
    for (std::uint32_t k = lo + 1; k < hi; ++k) {
        keyed.emplace_back(detail::distance_unchecked(points_.row(vantage), points_.row(order_[k])),
                           order_[k]);
    }
    const std::size_t median = keyed.size() / 2;
    std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(median), keyed.end());
    const double threshold = keyed[median].first;
    // Elements up to and including the median are <= threshold, the rest >= threshold.
    std::sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(median) + 1);
    std::sort(keyed.begin() + static_cast<std::ptrdiff_t>(median) + 1, keyed.end());
    for (std::size_t k = 0; k < keyed.size(); ++k) {
        order_[lo + 1 + k] = keyed[k].second;
    }

    const std::uint32_t split = lo + 1 + static_cast<std::uint32_t>(median) + 1;
    const std::int32_t inner = build(lo + 1, split);
    const std::int32_t outer = split < hi ? build(split, hi) : -1;

    Node& node = nodes_[id];
    node.vantage = vantage;
    node.threshold = threshold;
    node.inner = inner;
    node.outer = outer;
    return id;
}

std::vector<std::size_t> VpTree::query_radius(std::span<const double> q, double eps) const {
    std::vector<std::size_t> out;
    if (root_ < 0) {
        return out;
    }
    check_query(points_.dim(), q, eps);

    std::vector<std::int32_t> stack{root_};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if (node.inner < 0 && node.outer < 0) {
            for (std::uint32_t k = node.bucket_begin; k < node.bucket_end; ++k) {
                if (detail::distance_unchecked(points_.row(order_[k]), q) <= eps) {
                    out.push_back(order_[k]);
                }
            }
            continue;
        }
        const double d = detail::distance_unchecked(points_.row(node.vantage), q);
        if (d <= eps) {
            out.push_back(node.vantage);
        }
        if (node.outer >= 0 && d + eps >= node.threshold - kPruneSlack) {
            stack.push_back(node.outer);
        }
        if (node.inner >= 0 && d - eps <= node.threshold + kPruneSlack) {
            stack.push_back(node.inner);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

NeighborIndex::NeighborIndex(const PointMatrix& points, IndexBackend backend)
    : points_(&points), backend_(backend) {
    if (backend_ == IndexBackend::Auto) {
        backend_ = points.size() >= kTreeThreshold ? IndexBackend::Tree : IndexBackend::Brute;
    }
    if (backend_ == IndexBackend::Tree) {
        tree_ = VpTree(points);
    }
}

std::vector<std::size_t> NeighborIndex::query_radius(std::span<const double> q, double eps) const {
    if (backend_ == IndexBackend::Tree) {
        return tree_.query_radius(q, eps);
    }
    return brute_force_radius(*points_, q, eps);
}

}  // namespace atelier
