#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "atelier/embed.hpp"
#include "atelier/index.hpp"

namespace atelier {

inline constexpr double kDefaultEps = 0.9;
inline constexpr std::size_t kDefaultMinPts = 25;
inline constexpr int kNoise = -1;

struct ClusterParams {
    double eps = kDefaultEps;
    std::size_t min_pts = kDefaultMinPts;
    // Defaults to min_pts when unset.
    std::optional<std::size_t> min_cluster_size;

    std::size_t effective_min_cluster_size() const { return min_cluster_size.value_or(min_pts); }

    /// Throws DomainError unless eps is finite and positive, min_pts >= 1 and
    /// min_cluster_size >= 1.
    void validate() const;
};

// Per-point labels over input order. Clusters are numbered 0.. in discovery order after
// undersized clusters are dissolved.
struct DbscanLabels {
    std::vector<int> labels;
    std::vector<bool> core;
    int n_clusters = 0;
};

struct ClusteringResult {
    std::vector<std::string> face_order;
    std::vector<int> labels;
    std::vector<std::vector<std::string>> clusters;
    std::vector<std::string> noise;
    ClusterParams params;

    /// Rebuilds clusters/noise from face_order and labels.
    static ClusteringResult from_labels(std::vector<std::string> face_order,
                                        std::vector<int> labels, ClusterParams params = {});
};

/// Closed-ball brute-force neighborhood of point i, self included.
std::vector<std::size_t> region_query(const PointMatrix& points, std::size_t i, double eps);

/// DBSCAN with input-order traversal. A border point joins the first cluster that reaches
/// it. Clusters below min_cluster_size become noise. `threads` parallelizes the region
/// queries only; output does not depend on it.
DbscanLabels dbscan_labels(const PointMatrix& points, const ClusterParams& params,
                           IndexBackend backend = IndexBackend::Auto, unsigned threads = 1);

ClusteringResult dbscan(const std::vector<EmbeddingVector>& points, const ClusterParams& params,
                        IndexBackend backend = IndexBackend::Auto, unsigned threads = 1);

/// Distance from each point to its k-th nearest other point, ascending. Requires k < n.
std::vector<double> kdistance_profile(const PointMatrix& points, std::size_t k);

/// Knee of a sorted k-distance profile: the value farthest from the chord joining the
/// first and last samples, both axes scaled to [0, 1]. Throws DomainError on an empty
/// profile or a non-positive result.
double select_eps_elbow(const std::vector<double>& sorted_profile);

// Line-delimited `{"face_id": ..., "cluster_id": <int> | "noise"}` in face order.
void write_clusters(std::ostream& out, const ClusteringResult& result);
ClusteringResult read_clusters(std::istream& in);

}  // namespace atelier
