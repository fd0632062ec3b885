#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "atelier/corpus.hpp"

namespace atelier {

inline constexpr double kDefaultMajorityThreshold = 0.5;

enum class Task { Artist, Style, Year };

Task parse_task(const std::string& name);
const char* task_name(Task task);

struct ClusterAttribution {
    int cluster_id = 0;
    Task task = Task::Artist;
    std::string label;
    double majority_fraction = 0.0;
    std::size_t labeled_count = 0;
    std::size_t size = 0;
    std::vector<std::string> members;  // face ids; empty when read back from a file
};

struct AttributionOptions {
    double threshold = kDefaultMajorityThreshold;
    // Count distinct paintings instead of faces.
    bool dedupe_paintings = false;
};

/// The task label of a painting; absent for the year task when the year is missing.
std::optional<std::string> task_label(const PaintingRecord& painting, Task task);

/// Resolves face ids to paintings and returns the label of each face (absent where the
/// task label is missing). Throws IntegrityError for an unknown painting.
std::vector<std::optional<std::string>> face_labels(const std::vector<std::string>& faces,
                                                    Task task, const Corpus& corpus);

std::map<std::string, std::size_t> label_distribution(const std::vector<std::string>& cluster,
                                                      Task task, const Corpus& corpus,
                                                      bool dedupe_paintings = false);

/// Strict-majority naming: the top label's share of labeled members must exceed the
/// threshold and be unique. Throws DomainError unless 0 < threshold < 1.
std::optional<ClusterAttribution> attribute_cluster(const std::vector<std::string>& cluster,
                                                    int cluster_id, Task task,
                                                    const Corpus& corpus,
                                                    const AttributionOptions& options = {});

std::vector<ClusterAttribution> attribute_all(const std::vector<std::vector<std::string>>& clusters,
                                              Task task, const Corpus& corpus,
                                              const AttributionOptions& options = {});

/// Unions member sets of same-label clusters. Throws DomainError when tasks are mixed.
std::map<std::string, std::vector<std::string>> merge_by_label(
    const std::vector<ClusterAttribution>& attributions);

// Line-delimited `{cluster_id, task, label, fraction, size}`.
void write_attributions(std::ostream& out, const std::vector<ClusterAttribution>& attributions);
std::vector<ClusterAttribution> read_attributions(std::istream& in);

}  // namespace atelier
