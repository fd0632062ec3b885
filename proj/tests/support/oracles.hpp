#pragma once

// Test-only reference implementations. None of these share code paths with the library
// beyond the PointMatrix container.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "atelier/embed.hpp"

namespace oracle {

inline double dist(const atelier::PointMatrix& p, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t d = 0; d < p.dim(); ++d) {
        const double diff = p.row(a)[d] - p.row(b)[d];
        s += diff * diff;
    }
    return std::sqrt(s);
}

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

struct ReferenceDbscan {
    std::vector<int> labels;  // -1 noise
    std::vector<bool> core;
    std::vector<bool> ambiguous_border;  // non-core point adjacent to >1 core component
    bool any_ambiguous = false;
};

// O(n^2) DBSCAN via the full distance matrix: core components by union-find, border points
// go to the adjacent component with the smallest core index (the first one an input-order
// traversal discovers), undersized clusters dissolve, survivors are numbered by smallest
// core index.
inline ReferenceDbscan reference_dbscan(const atelier::PointMatrix& p, double eps, std::size_t min_pts,
                                        std::size_t min_cluster_size) {
    const std::size_t n = p.size();
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    ReferenceDbscan r;
    r.core.assign(n, false);
    r.ambiguous_border.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            adj[i][j] = dist(p, i, j) <= eps;
            count += adj[i][j];
        }
        r.core[i] = count >= min_pts;
    }
    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (r.core[i] && r.core[j] && adj[i][j]) sets.unite(i, j);

    // Union-find roots are the smallest index in each component.
    std::vector<long> owner(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (r.core[i]) {
            owner[i] = static_cast<long>(sets.find(i));
            continue;
        }
        std::set<std::size_t> comps;
        for (std::size_t j = 0; j < n; ++j)
            if (r.core[j] && adj[i][j]) comps.insert(sets.find(j));
        if (!comps.empty()) owner[i] = static_cast<long>(*comps.begin());
        if (comps.size() > 1) {
            r.ambiguous_border[i] = true;
            r.any_ambiguous = true;
        }
    }
    std::map<long, std::size_t> sizes;
    for (long o : owner)
        if (o >= 0) ++sizes[o];
    std::map<long, int> renumber;
    int next = 0;
    for (const auto& [root, size] : sizes)  // ascending root = discovery order
        if (size >= min_cluster_size) renumber[root] = next++;
    r.labels.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        if (owner[i] >= 0 && renumber.count(owner[i])) r.labels[i] = renumber[owner[i]];
    return r;
}

// Canonical co-membership: pairs of core points sharing a cluster.
inline std::set<std::pair<std::size_t, std::size_t>> core_pairs(const std::vector<int>& labels,
                                                                const std::vector<bool>& core,
                                                                const std::vector<std::size_t>& original_index) {
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (core[i] && labels[i] >= 0) members[labels[i]].push_back(original_index[i]);
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (auto& [_, m] : members) {
        std::sort(m.begin(), m.end());
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = a + 1; b < m.size(); ++b) out.emplace(m[a], m[b]);
    }
    return out;
}

// Partition oracles over integer codes.
inline double purity(const std::vector<std::size_t>& cl, const std::vector<std::size_t>& cs) {
    std::map<std::size_t, std::map<std::size_t, std::size_t>> table;
    for (std::size_t i = 0; i < cl.size(); ++i) ++table[cl[i]][cs[i]];
    double sum = 0.0;
    for (const auto& [_, row] : table) {
        std::size_t best = 0;
        for (const auto& [__, c] : row) best = std::max(best, c);
        sum += static_cast<double>(best);
    }
    return sum / static_cast<double>(cl.size());
}

// Probability form: I = sum p_kj log(p_kj / (p_k p_j)), H in log2; the ratio is base-free.
inline double nmi(const std::vector<std::size_t>& cl, const std::vector<std::size_t>& cs) {
    const double n = static_cast<double>(cl.size());
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> pk, pj;
    for (std::size_t i = 0; i < cl.size(); ++i) {
        joint[{cl[i], cs[i]}] += 1.0;
        pk[cl[i]] += 1.0;
        pj[cs[i]] += 1.0;
    }
    for (auto& [_, p] : joint) p /= n;
    for (auto& [_, p] : pk) p /= n;
    for (auto& [_, p] : pj) p /= n;
    double mi = 0.0;
    for (const auto& [key, p] : joint) mi += p * std::log2(p / (pk[key.first] * pj[key.second]));
    double hk = 0.0, hj = 0.0;
    for (const auto& [_, p] : pk) hk -= p * std::log2(p);
    for (const auto& [_, p] : pj) hj -= p * std::log2(p);
    if (hk + hj == 0.0) return 1.0;
    return mi / ((hk + hj) / 2.0);
}

struct Pairs {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Pairs pairs(const std::vector<std::size_t>& cl, const std::vector<std::size_t>& cs) {
    Pairs p;
    for (std::size_t a = 0; a < cl.size(); ++a)
        for (std::size_t b = a + 1; b < cl.size(); ++b) {
            const bool same_cluster = cl[a] == cl[b];
            const bool same_class = cs[a] == cs[b];
            if (same_cluster && same_class) ++p.tp;
            else if (same_cluster) ++p.fp;
            else if (same_class) ++p.fn;
            else ++p.tn;
        }
    return p;
}

inline double rand_index(const std::vector<std::size_t>& cl, const std::vector<std::size_t>& cs) {
    const auto p = pairs(cl, cs);
    return static_cast<double>(p.tp + p.tn) / static_cast<double>(p.tp + p.tn + p.fp + p.fn);
}

// Random unit vectors in `dim` dimensions.
inline atelier::PointMatrix random_unit_points(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    atelier::PointMatrix m(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (auto& x : m.row(i)) {
            x = g(rng);
            s += x * x;
        }
        s = std::sqrt(s);
        for (auto& x : m.row(i)) x /= s;
    }
    return m;
}

// Gaussian blobs plus uniform background in [-1, 1]^dim.
inline atelier::PointMatrix blob_points(std::size_t n, std::size_t dim, std::size_t n_blobs, double sigma,
                                        double background_fraction, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> centers(n_blobs, std::vector<double>(dim));
    for (auto& c : centers)
        for (auto& x : c) x = u(rng);
    atelier::PointMatrix m(n, dim);
    std::uniform_int_distribution<std::size_t> pick(0, n_blobs - 1);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = m.row(i);
        if (std::generate_canonical<double, 53>(rng) < background_fraction) {
            for (auto& x : row) x = u(rng);
        } else {
            const auto& c = centers[pick(rng)];
            for (std::size_t d = 0; d < dim; ++d) row[d] = c[d] + sigma * g(rng);
        }
    }
    return m;
}

}  // namespace oracle
