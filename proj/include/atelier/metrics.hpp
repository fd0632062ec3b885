#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <tuple>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "atelier/attribute.hpp"
#include "atelier/corpus.hpp"
#include "atelier/dbscan.hpp"

namespace atelier {

// `Paper` keeps precision = TP/(TP+FN) and recall = TP/(TP+FP), the reverse of the usual
// definitions, so that published tables can be reproduced column for column.
enum class Convention { Paper, Standard };

Convention parse_convention(const std::string& name);
const char* convention_name(Convention convention);
const char* convention_note(Convention convention);

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct ClusterMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

/// Harmonic mean; 0 when p + r = 0.
double f_measure(double precision, double recall);

/// tp = |cluster ∩ members|, fp = |cluster| - tp, fn = |members ∩ universe| - tp,
/// tn = the rest of the universe. Throws DomainError unless cluster ⊆ universe.
ConfusionCounts confusion_counts(const std::vector<std::string>& cluster,
                                 const std::unordered_set<std::string>& label_members,
                                 const std::vector<std::string>& universe);

/// Label members are the universe faces whose task label equals `label`.
ConfusionCounts confusion_counts(const std::vector<std::string>& cluster, const std::string& label,
                                 Task task, const std::vector<std::string>& universe,
                                 const Corpus& corpus);

/// 0/0 ratios are 0.
ClusterMetrics cluster_metrics(const ConfusionCounts& c, Convention convention = Convention::Paper);

// Sparse contingency table between a clustering and a class partition given as dense
// integer codes per item.
class ContingencyTable {
public:
    ContingencyTable(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of);

    std::size_t total() const { return total_; }
    const std::vector<std::size_t>& cluster_sizes() const { return cluster_sizes_; }
    const std::vector<std::size_t>& class_sizes() const { return class_sizes_; }
    // (cluster, class, count) for non-empty cells, ordered by cluster then class.
    const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>& cells() const { return cells_; }

private:
    std::size_t total_ = 0;
    std::vector<std::size_t> cluster_sizes_;
    std::vector<std::size_t> class_sizes_;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> cells_;
};

struct PairCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    bool operator==(const PairCounts&) const = default;
};

// Integer-coded partition metrics. Both spans have one entry per item.
double purity(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of);
double nmi(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of);
PairCounts pair_counts(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of);
double rand_index(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of);

using LabelMap = std::unordered_map<std::string, std::string>;

// String-keyed forms. Clusters must be disjoint and every member labeled.
double purity(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels);
double nmi(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels);
PairCounts pair_counts(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels);
double rand_index(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels);

enum class Universe { AllFaces, ClusteredFaces };

struct ReportOptions {
    Convention convention = Convention::Paper;
    Universe universe = Universe::AllFaces;
    // Noise faces join the inter-cluster metrics as singleton clusters.
    bool include_noise = false;
};

struct ReportRow {
    int cluster_id = 0;
    std::string label;
    std::size_t size = 0;
    ConfusionCounts counts;
    ClusterMetrics metrics;
};

struct GroupRow {
    std::string label;
    std::size_t n_clusters = 0;
    std::size_t size = 0;
    ConfusionCounts counts;
    ClusterMetrics metrics;
};

struct TaskReport {
    Task task = Task::Artist;
    Convention convention = Convention::Paper;
    std::vector<ReportRow> rows;
    std::optional<ClusterMetrics> averages;
    std::vector<GroupRow> merged;
    std::optional<double> task_accuracy;  // mean accuracy over merged label groups
    std::size_t n_clusters_total = 0;
    std::size_t n_clusters_attributed = 0;
    std::size_t universe_size = 0;
    std::size_t n_scored_faces = 0;  // items entering purity / NMI / RI
    std::optional<double> purity;
    std::optional<double> nmi;
    std::optional<double> rand_index;
};

/// Per-cluster rows for the attributed clusters, their averages, merged-group accuracy and
/// inter-cluster purity/NMI/RI over clustered, labeled faces. Members of attributions are
/// taken from `clustering` by cluster id.
TaskReport build_task_report(const ClusteringResult& clustering,
                             const std::vector<ClusterAttribution>& attributions,
                             const Corpus& corpus, Task task, const ReportOptions& options = {});

nlohmann::ordered_json report_json(const TaskReport& report);
void write_report_csv(std::ostream& out, const TaskReport& report);

}  // namespace atelier
