#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "atelier/embed.hpp"

namespace atelier {

// Below this many points a linear scan beats the tree.
inline constexpr std::size_t kTreeThreshold = 2000;

enum class IndexBackend { Brute, Tree, Auto };

IndexBackend parse_backend(const std::string& name);
const char* backend_name(IndexBackend backend);

/// Indices j with euclidean(points[j], q) <= eps, ascending.
std::vector<std::size_t> brute_force_radius(const PointMatrix& points, std::span<const double> q,
                                            double eps);

// Exact vantage-point tree. Inner children hold points at distance <= threshold from the
// vantage point, outer children points at distance >= threshold.
class VpTree {
public:
    struct Node {
        std::uint32_t vantage = 0;  // point index; unused for leaves
        double threshold = 0.0;
        std::int32_t inner = -1;
        std::int32_t outer = -1;
        std::uint32_t bucket_begin = 0;  // leaves: range into order()
        std::uint32_t bucket_end = 0;

        bool is_leaf() const { return inner < 0 && outer < 0 && bucket_end > bucket_begin; }
        bool operator==(const Node&) const = default;
    };

    VpTree() = default;
    explicit VpTree(PointMatrix points, std::size_t leaf_size = 8);

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return points_.dim(); }
    const PointMatrix& points() const { return points_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::uint32_t>& order() const { return order_; }

    /// Exact closed-ball query, result ascending. Throws DomainError on dimension
    /// mismatch or eps <= 0.
    std::vector<std::size_t> query_radius(std::span<const double> q, double eps) const;

private:
    std::int32_t build(std::uint32_t lo, std::uint32_t hi);

    PointMatrix points_;
    std::size_t leaf_size_ = 8;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
    std::int32_t root_ = -1;
};

/// Region queries over a fixed point set through the chosen backend.
class NeighborIndex {
public:
    NeighborIndex(const PointMatrix& points, IndexBackend backend);

    IndexBackend backend() const { return backend_; }
    std::vector<std::size_t> query_radius(std::span<const double> q, double eps) const;

private:
    const PointMatrix* points_;
    IndexBackend backend_;
    VpTree tree_;
};

}  // namespace atelier
