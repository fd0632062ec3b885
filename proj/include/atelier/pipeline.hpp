#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "atelier/align.hpp"
#include "atelier/attribute.hpp"
#include "atelier/dbscan.hpp"
#include "atelier/metrics.hpp"

namespace atelier {

struct TaskClusterConfig {
    ClusterParams params;
    // Pick eps from the elbow of the (min_pts - 1)-distance profile.
    bool auto_eps = false;
    IndexBackend backend = IndexBackend::Auto;
};

struct PipelineConfig {
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> detections;
    std::optional<std::filesystem::path> embeddings;
    std::filesystem::path output_dir;

    TaskClusterConfig artist;
    TaskClusterConfig style;
    TaskClusterConfig year;

    AttributionOptions attribution;
    ReportOptions report;
    bool write_json = true;
    bool write_csv = true;

    int margin = kDefaultMargin;
    int crop_size = kDefaultCropSize;
    unsigned threads = 1;

    TaskClusterConfig& for_task(Task task);
    const TaskClusterConfig& for_task(Task task) const;

    /// Throws DomainError for invalid parameters and InputError for missing inputs.
    void validate() const;
};

inline constexpr std::array<Task, 3> kAllTasks = {Task::Artist, Task::Style, Task::Year};

/// Reads a JSON config. Relative paths resolve against the config file's directory.
PipelineConfig load_config(const std::filesystem::path& file);
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct TaskRun {
    Task task;
    ClusterParams params;
    ClusteringResult clustering;
    std::vector<ClusterAttribution> attributions;
    TaskReport report;
};

struct PipelineResult {
    std::vector<TaskRun> runs;
    nlohmann::ordered_json bundle;
};

/// Resolves the DBSCAN parameters for a task, computing eps from the elbow when asked.
ClusterParams resolve_params(const TaskClusterConfig& config, const PointMatrix& points);

/// Writes `<dir>/<stem>.json` / `.csv` for one report according to the config's formats.
void write_report_files(const std::filesystem::path& json_path,
                        const std::optional<std::filesystem::path>& csv_path,
                        const TaskReport& report);

/// align (when only detections are given) -> embed -> per task: cluster, attribute,
/// report. Intermediate files land in output_dir.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Crops every detection and embeds it with the mock embedder. Image paths in the
/// manifest resolve against `image_root`.
std::vector<FaceInstance> align_corpus(const Corpus& corpus, const std::vector<Detection>& detections,
                                       const std::filesystem::path& image_root, int margin,
                                       int crop_size);

/// Worker cap from ATELIER_THREADS, else 1.
unsigned threads_from_env();

}  // namespace atelier
