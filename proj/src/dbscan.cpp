#include "atelier/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <thread>

#include "json.hpp"

#include "atelier/error.hpp"

namespace atelier {

namespace {

constexpr int kUnassigned = -2;

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) {
                fn(i);
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
}

void check_finite(const PointMatrix& points) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (double x : points.row(i)) {
            if (!std::isfinite(x)) {
                throw DomainError("point " + std::to_string(i) + " has a non-finite coordinate");
            }
        }
    }
}

}  // namespace

void ClusterParams::validate() const {
    if (!std::isfinite(eps) || eps <= 0.0) {
        throw DomainError("eps must be finite and > 0");
    }
    if (min_pts < 1) {
        throw DomainError("min_pts must be >= 1");
    }
    if (effective_min_cluster_size() < 1) {
        throw DomainError("min_cluster_size must be >= 1");
    }
}

ClusteringResult ClusteringResult::from_labels(std::vector<std::string> face_order,
                                               std::vector<int> labels, ClusterParams params) {
    if (face_order.size() != labels.size()) {
        throw DomainError("face order and labels differ in length");
    }
    ClusteringResult r;
    int n_clusters = 0;
    for (int label : labels) {
        n_clusters = std::max(n_clusters, label + 1);
    }
    r.clusters.resize(static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kNoise) {
            r.noise.push_back(face_order[i]);
        } else if (labels[i] >= 0) {
            r.clusters[static_cast<std::size_t>(labels[i])].push_back(face_order[i]);
        } else {
            throw DomainError("invalid cluster label " + std::to_string(labels[i]));
        }
    }
    r.face_order = std::move(face_order);
    r.labels = std::move(labels);
    r.params = params;
    return r;
}

std::vector<std::size_t> region_query(const PointMatrix& points, std::size_t i, double eps) {
    if (i >= points.size()) {
        throw DomainError("region query index " + std::to_string(i) + " out of range");
    }
    return brute_force_radius(points, points.row(i), eps);
}

DbscanLabels dbscan_labels(const PointMatrix& points, const ClusterParams& params,
                           IndexBackend backend, unsigned threads) {
    params.validate();
    check_finite(points);
    const std::size_t n = points.size();

    DbscanLabels out;
    out.labels.assign(n, kUnassigned);
    out.core.assign(n, false);
    if (n == 0) {
        return out;
    }

    const NeighborIndex index(points, backend);
    std::vector<std::vector<std::size_t>> neighbors(n);
    parallel_for(n, threads, [&](std::size_t i) { neighbors[i] = index.query_radius(points.row(i), params.eps); });
    for (std::size_t i = 0; i < n; ++i) {
        out.core[i] = neighbors[i].size() >= params.min_pts;
    }

    // Expansion is sequential over the frozen neighbor lists.
    int cluster = 0;
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.core[i] || out.labels[i] != kUnassigned) {
            continue;
        }
        out.labels[i] = cluster;
        frontier.push_back(i);
        while (!frontier.empty()) {
            const std::size_t p = frontier.front();
            frontier.pop_front();
            for (std::size_t j : neighbors[p]) {
                if (out.labels[j] != kUnassigned) {
                    continue;
                }
                out.labels[j] = cluster;
                if (out.core[j]) {
                    frontier.push_back(j);
                }
            }
        }
        ++cluster;
    }

    std::vector<std::size_t> sizes(static_cast<std::size_t>(cluster), 0);
    for (int label : out.labels) {
        if (label >= 0) {
            ++sizes[static_cast<std::size_t>(label)];
        }
    }
    std::vector<int> renumber(static_cast<std::size_t>(cluster), kNoise);
    int kept = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] >= params.effective_min_cluster_size()) {
            renumber[c] = kept++;
        }
    }
    for (int& label : out.labels) {
        label = label >= 0 ? renumber[static_cast<std::size_t>(label)] : kNoise;
    }
    out.n_clusters = kept;
    return out;
}

ClusteringResult dbscan(const std::vector<EmbeddingVector>& points, const ClusterParams& params,
                        IndexBackend backend, unsigned threads) {
    const PointMatrix matrix(points);
    auto labels = dbscan_labels(matrix, params, backend, threads);
    std::vector<std::string> ids;
    ids.reserve(points.size());
    for (const auto& p : points) {
        ids.push_back(p.face_id);
    }
    return ClusteringResult::from_labels(std::move(ids), std::move(labels.labels), params);
}

std::vector<double> kdistance_profile(const PointMatrix& points, std::size_t k) {
    const std::size_t n = points.size();
    if (k == 0 || k >= n) {
        throw DomainError("k-distance needs 0 < k < n (k = " + std::to_string(k) + ", n = " +
                          std::to_string(n) + ")");
    }
    std::vector<double> profile(n);
    std::vector<double> dist(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                dist[m++] = detail::distance_unchecked(points.row(i), points.row(j));
            }
        }
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
        profile[i] = dist[k - 1];
    }
    std::sort(profile.begin(), profile.end());
    return profile;
}

double select_eps_elbow(const std::vector<double>& sorted_profile) {
    if (sorted_profile.empty()) {
        throw DomainError("empty k-distance profile");
    }
    const double lo = sorted_profile.front();
    const double hi = sorted_profile.back();
    double eps = lo;
    if (hi > lo && sorted_profile.size() > 1) {
        const double last = static_cast<double>(sorted_profile.size() - 1);
        double best = -1.0;
        for (std::size_t i = 0; i < sorted_profile.size(); ++i) {
            const double gap = static_cast<double>(i) / last - (sorted_profile[i] - lo) / (hi - lo);
            if (gap > best) {
                best = gap;
                eps = sorted_profile[i];
            }
        }
    }
    if (!(eps > 0.0)) {
        throw DomainError("k-distance elbow is zero; choose eps explicitly");
    }
    return eps;
}

void write_clusters(std::ostream& out, const ClusteringResult& result) {
    for (std::size_t i = 0; i < result.face_order.size(); ++i) {
        nlohmann::ordered_json row;
        row["face_id"] = result.face_order[i];
        if (result.labels[i] == kNoise) {
            row["cluster_id"] = "noise";
        } else {
            row["cluster_id"] = result.labels[i];
        }
        out << row.dump() << '\n';
    }
}

ClusteringResult read_clusters(std::istream& in) {
    std::vector<std::string> faces;
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto row = nlohmann::json::parse(line);
            faces.push_back(row.at("face_id").get<std::string>());
            const auto& id = row.at("cluster_id");
            if (id.is_string() && id.get<std::string>() == "noise") {
                labels.push_back(kNoise);
            } else if (id.is_number_integer() && id.get<long long>() >= 0) {
                labels.push_back(static_cast<int>(id.get<long long>()));
            } else {
                throw ParseError("clusters line " + std::to_string(line_no) +
                                 ": cluster_id must be a non-negative integer or \"noise\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("clusters line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    auto result = ClusteringResult::from_labels(std::move(faces), std::move(labels));
    for (std::size_t c = 0; c < result.clusters.size(); ++c) {
        if (result.clusters[c].empty()) {
            throw ParseError("cluster ids are not contiguous: cluster " + std::to_string(c) + " is empty");
        }
    }
    return result;
}

}  // namespace atelier
