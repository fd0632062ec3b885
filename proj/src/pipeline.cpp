#include "atelier/pipeline.hpp"

#include <cstdlib>
#include <fstream>

#include "atelier/corpus.hpp"
#include "atelier/error.hpp"

namespace atelier {

namespace fs = std::filesystem;

namespace {

void apply_cluster_json(const nlohmann::json& j, TaskClusterConfig& cfg) {
    if (auto it = j.find("eps"); it != j.end()) {
        if (it->is_string() && it->get<std::string>() == "auto") {
            cfg.auto_eps = true;
        } else if (it->is_number()) {
            cfg.auto_eps = false;
            cfg.params.eps = it->get<double>();
        } else {
            throw InputError("config: eps must be a number or \"auto\"");
        }
    }
    if (auto it = j.find("min_pts"); it != j.end()) {
        const auto v = it->get<long long>();
        if (v < 1) {
            throw DomainError("config: min_pts must be >= 1");
        }
        cfg.params.min_pts = static_cast<std::size_t>(v);
    }
    if (auto it = j.find("min_cluster_size"); it != j.end()) {
        const auto v = it->get<long long>();
        if (v < 1) {
            throw DomainError("config: min_cluster_size must be >= 1");
        }
        cfg.params.min_cluster_size = static_cast<std::size_t>(v);
    }
    if (auto it = j.find("index"); it != j.end()) {
        cfg.backend = parse_backend(it->get<std::string>());
    }
}

fs::path resolve_path(const nlohmann::json& value, const fs::path& base_dir) {
    fs::path p = value.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + file.string());
    }
    out << text;
}

}  // namespace

TaskClusterConfig& PipelineConfig::for_task(Task task) {
    switch (task) {
        case Task::Artist: return artist;
        case Task::Style: return style;
        case Task::Year: return year;
    }
    return artist;
}

const TaskClusterConfig& PipelineConfig::for_task(Task task) const {
    return const_cast<PipelineConfig*>(this)->for_task(task);
}

void PipelineConfig::validate() const {
    for (Task task : kAllTasks) {
        const auto& cfg = for_task(task);
        if (!cfg.auto_eps) {
            cfg.params.validate();
        } else if (cfg.params.min_pts < 2) {
            throw DomainError("automatic eps needs min_pts >= 2");
        }
    }
    if (!(attribution.threshold > 0.0 && attribution.threshold < 1.0)) {
        throw DomainError("attribution threshold must lie in (0, 1)");
    }
    if (margin < 0 || margin % 2 != 0 || crop_size < 1) {
        throw DomainError("margin must be even and >= 0, crop size >= 1");
    }
    if (manifest.empty() || !fs::exists(manifest)) {
        throw InputError("manifest not found: " + manifest.string());
    }
    if (embeddings) {
        if (!fs::exists(*embeddings)) {
            throw InputError("embeddings not found: " + embeddings->string());
        }
    } else if (detections) {
        if (!fs::exists(*detections)) {
            throw InputError("detections not found: " + detections->string());
        }
    } else {
        throw InputError("config needs either embeddings or detections");
    }
    if (output_dir.empty()) {
        throw InputError("config needs an output_dir");
    }
}

PipelineConfig config_from_json(const nlohmann::json& doc, const fs::path& base_dir) {
    PipelineConfig cfg;
    try {
        if (!doc.is_object()) {
            throw InputError("config must be a JSON object");
        }
        if (auto it = doc.find("manifest"); it != doc.end()) cfg.manifest = resolve_path(*it, base_dir);
        if (auto it = doc.find("detections"); it != doc.end()) cfg.detections = resolve_path(*it, base_dir);
        if (auto it = doc.find("embeddings"); it != doc.end()) cfg.embeddings = resolve_path(*it, base_dir);
        if (auto it = doc.find("output_dir"); it != doc.end()) cfg.output_dir = resolve_path(*it, base_dir);

        if (auto it = doc.find("cluster"); it != doc.end()) {
            for (Task task : kAllTasks) {
                apply_cluster_json(*it, cfg.for_task(task));
            }
        }
        if (auto it = doc.find("tasks"); it != doc.end()) {
            for (const auto& [name, value] : it->items()) {
                apply_cluster_json(value, cfg.for_task(parse_task(name)));
            }
        }
        if (auto it = doc.find("attribution"); it != doc.end()) {
            cfg.attribution.threshold = it->value("threshold", cfg.attribution.threshold);
            cfg.attribution.dedupe_paintings = it->value("dedupe_paintings", cfg.attribution.dedupe_paintings);
        }
        if (auto it = doc.find("report"); it != doc.end()) {
            cfg.report.convention = parse_convention(it->value("convention", std::string("paper")));
            const auto universe = it->value("universe", std::string("all"));
            if (universe == "all") {
                cfg.report.universe = Universe::AllFaces;
            } else if (universe == "clustered") {
                cfg.report.universe = Universe::ClusteredFaces;
            } else {
                throw InputError("config: report.universe must be \"all\" or \"clustered\"");
            }
            cfg.report.include_noise = it->value("include_noise", false);
            if (auto f = it->find("formats"); f != it->end()) {
                cfg.write_json = cfg.write_csv = false;
                for (const auto& format : *f) {
                    const auto name = format.get<std::string>();
                    if (name == "json") {
                        cfg.write_json = true;
                    } else if (name == "csv") {
                        cfg.write_csv = true;
                    } else {
                        throw InputError("config: unknown report format \"" + name + "\"");
                    }
                }
            }
        }
        if (auto it = doc.find("align"); it != doc.end()) {
            cfg.margin = it->value("margin", cfg.margin);
            cfg.crop_size = it->value("crop_size", cfg.crop_size);
        }
        cfg.threads = doc.value("threads", threads_from_env());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw InputError("config not found: " + file.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("config " + file.string() + ": " + e.what());
    }
    return config_from_json(doc, file.parent_path());
}

unsigned threads_from_env() {
    if (const char* env = std::getenv("ATELIER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<unsigned>(v);
        }
    }
    return 1;
}

ClusterParams resolve_params(const TaskClusterConfig& config, const PointMatrix& points) {
    ClusterParams params = config.params;
    if (config.auto_eps) {
        if (points.size() <= params.min_pts - 1 || params.min_pts < 2) {
            throw DomainError("too few points to choose eps from the k-distance elbow");
        }
        params.eps = select_eps_elbow(kdistance_profile(points, params.min_pts - 1));
    }
    params.validate();
    return params;
}

std::vector<FaceInstance> align_corpus(const Corpus& corpus, const std::vector<Detection>& detections,
                                       const fs::path& image_root, int margin, int crop_size) {
    std::vector<FaceInstance> faces;
    faces.reserve(detections.size());
    for (const auto& det : detections) {
        const auto* painting = corpus.find(det.painting_id);
        if (painting == nullptr) {
            throw IntegrityError("detection for unknown painting \"" + det.painting_id + "\"");
        }
        fs::path image_path = painting->source_path;
        if (image_path.is_relative()) {
            image_path = image_root / image_path;
        }
        faces.push_back(align_face(read_netpbm(image_path), det, margin, crop_size));
    }
    return faces;
}

void write_report_files(const fs::path& json_path, const std::optional<fs::path>& csv_path,
                        const TaskReport& report) {
    if (!json_path.empty()) {
        write_text(json_path, report_json(report).dump(2) + "\n");
    }
    if (csv_path) {
        std::ofstream out(*csv_path, std::ios::binary);
        if (!out) {
            throw InputError("cannot write " + csv_path->string());
        }
        write_report_csv(out, report);
    }
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    const Corpus corpus(load_manifest(config.manifest));

    std::vector<EmbeddingVector> embeddings;
    if (config.embeddings) {
        embeddings = load_embeddings(*config.embeddings);
    } else {
        std::ifstream det_in(*config.detections);
        const auto detections = parse_detections(det_in);
        const auto faces = align_corpus(corpus, detections, config.manifest.parent_path(), config.margin,
                                        config.crop_size);
        const auto crops_dir = config.output_dir / "crops";
        fs::create_directories(crops_dir);
        for (const auto& face : faces) {
            write_netpbm(crops_dir / (face.face_id + (face.crop.channels() == 1 ? ".pgm" : ".ppm")), face.crop);
            embeddings.push_back(mock_embed(face.crop, face.face_id));
        }
        save_store(config.output_dir / "embeddings.femb", embeddings);
    }
    const PointMatrix points(embeddings);
    std::vector<std::string> face_ids;
    face_ids.reserve(embeddings.size());
    for (const auto& e : embeddings) {
        face_ids.push_back(e.face_id);
    }

    PipelineResult result;
    result.bundle["convention"] = convention_name(config.report.convention);
    result.bundle["tasks"] = nlohmann::ordered_json::array();
    for (Task task : kAllTasks) {
        const auto& task_cfg = config.for_task(task);
        TaskRun run{task, resolve_params(task_cfg, points), {}, {}, {}};
        auto labels = dbscan_labels(points, run.params, task_cfg.backend, config.threads);
        run.clustering = ClusteringResult::from_labels(face_ids, std::move(labels.labels), run.params);
        run.attributions = attribute_all(run.clustering.clusters, task, corpus, config.attribution);
        run.report = build_task_report(run.clustering, run.attributions, corpus, task, config.report);

        const std::string name = task_name(task);
        {
            std::ofstream out(config.output_dir / ("clusters_" + name + ".jsonl"), std::ios::binary);
            write_clusters(out, run.clustering);
        }
        {
            std::ofstream out(config.output_dir / ("attributions_" + name + ".jsonl"), std::ios::binary);
            write_attributions(out, run.attributions);
        }
        write_report_files(config.write_json ? config.output_dir / ("report_" + name + ".json") : fs::path(),
                           config.write_csv ? std::optional(config.output_dir / ("report_" + name + ".csv"))
                                            : std::nullopt,
                           run.report);

        nlohmann::ordered_json entry;
        entry["task"] = name;
        entry["params"] = {{"eps", run.params.eps},
                           {"min_pts", run.params.min_pts},
                           {"min_cluster_size", run.params.effective_min_cluster_size()},
                           {"eps_source", task_cfg.auto_eps ? "kdistance-elbow" : "config"}};
        entry["report"] = report_json(run.report);
        result.bundle["tasks"].push_back(std::move(entry));
        result.runs.push_back(std::move(run));
    }
    if (config.write_json) {
        write_text(config.output_dir / "report.json", result.bundle.dump(2) + "\n");
    }
    return result;
}

}  // namespace atelier
