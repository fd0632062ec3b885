#include "atelier/attribute.hpp"

#include <set>
#include <unordered_set>

#include "json.hpp"

#include "atelier/align.hpp"
#include "atelier/error.hpp"

namespace atelier {

Task parse_task(const std::string& name) {
    if (name == "artist") return Task::Artist;
    if (name == "style") return Task::Style;
    if (name == "year") return Task::Year;
    throw DomainError("unknown task \"" + name + "\" (expected artist, style or year)");
}

const char* task_name(Task task) {
    switch (task) {
        case Task::Artist: return "artist";
        case Task::Style: return "style";
        case Task::Year: return "year";
    }
    return "artist";
}

std::optional<std::string> task_label(const PaintingRecord& painting, Task task) {
    switch (task) {
        case Task::Artist: return painting.artist;
        case Task::Style: return painting.style;
        case Task::Year:
            if (!painting.year) {
                return std::nullopt;
            }
            return year_bin(*painting.year).label;
    }
    return std::nullopt;
}

namespace {

const PaintingRecord& resolve(const std::string& face_id, const Corpus& corpus) {
    const auto* painting = corpus.find(painting_of_face(face_id));
    if (painting == nullptr) {
        throw IntegrityError("face \"" + face_id + "\" does not resolve to a painting in the manifest");
    }
    return *painting;
}

}  // namespace

std::vector<std::optional<std::string>> face_labels(const std::vector<std::string>& faces, Task task,
                                                    const Corpus& corpus) {
    std::vector<std::optional<std::string>> out;
    out.reserve(faces.size());
    for (const auto& face : faces) {
        out.push_back(task_label(resolve(face, corpus), task));
    }
    return out;
}

std::map<std::string, std::size_t> label_distribution(const std::vector<std::string>& cluster,
                                                      Task task, const Corpus& corpus,
                                                      bool dedupe_paintings) {
    std::map<std::string, std::size_t> counts;
    std::set<std::string> counted_paintings;
    for (const auto& face : cluster) {
        const auto& painting = resolve(face, corpus);
        auto label = task_label(painting, task);
        if (!label) {
            continue;
        }
        if (dedupe_paintings && !counted_paintings.insert(painting.painting_id).second) {
            continue;
        }
        ++counts[*label];
    }
    return counts;
}

std::optional<ClusterAttribution> attribute_cluster(const std::vector<std::string>& cluster,
                                                    int cluster_id, Task task, const Corpus& corpus,
                                                    const AttributionOptions& options) {
    if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
        throw DomainError("majority threshold must lie in (0, 1)");
    }
    const auto counts = label_distribution(cluster, task, corpus, options.dedupe_paintings);
    std::size_t labeled = 0;
    std::size_t best = 0;
    std::size_t best_ties = 0;
    const std::string* best_label = nullptr;
    for (const auto& [label, count] : counts) {
        labeled += count;
        if (count > best) {
            best = count;
            best_ties = 1;
            best_label = &label;
        } else if (count == best) {
            ++best_ties;
        }
    }
    if (labeled == 0 || best_ties != 1) {
        return std::nullopt;
    }
    const double fraction = static_cast<double>(best) / static_cast<double>(labeled);
    if (!(fraction > options.threshold)) {
        return std::nullopt;
    }
    ClusterAttribution a;
    a.cluster_id = cluster_id;
    a.task = task;
    a.label = *best_label;
    a.majority_fraction = fraction;
    a.labeled_count = labeled;
    a.size = cluster.size();
    a.members = cluster;
    return a;
}

std::vector<ClusterAttribution> attribute_all(const std::vector<std::vector<std::string>>& clusters,
                                              Task task, const Corpus& corpus,
                                              const AttributionOptions& options) {
    if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
        throw DomainError("majority threshold must lie in (0, 1)");
    }
    std::vector<ClusterAttribution> out;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        if (auto a = attribute_cluster(clusters[c], static_cast<int>(c), task, corpus, options)) {
            out.push_back(std::move(*a));
        }
    }
    return out;
}

std::map<std::string, std::vector<std::string>> merge_by_label(
    const std::vector<ClusterAttribution>& attributions) {
    std::map<std::string, std::vector<std::string>> merged;
    std::map<std::string, std::unordered_set<std::string>> seen;
    for (const auto& a : attributions) {
        if (a.task != attributions.front().task) {
            throw DomainError("cannot merge attributions from different tasks");
        }
        auto& group = merged[a.label];
        auto& group_seen = seen[a.label];
        for (const auto& face : a.members) {
            if (group_seen.insert(face).second) {
                group.push_back(face);
            }
        }
    }
    return merged;
}

void write_attributions(std::ostream& out, const std::vector<ClusterAttribution>& attributions) {
    for (const auto& a : attributions) {
        nlohmann::ordered_json row;
        row["cluster_id"] = a.cluster_id;
        row["task"] = task_name(a.task);
        row["label"] = a.label;
        row["fraction"] = a.majority_fraction;
        row["size"] = a.size;
        row["labeled_count"] = a.labeled_count;
        out << row.dump() << '\n';
    }
}

std::vector<ClusterAttribution> read_attributions(std::istream& in) {
    std::vector<ClusterAttribution> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto row = nlohmann::json::parse(line);
            ClusterAttribution a;
            a.cluster_id = row.at("cluster_id").get<int>();
            a.task = parse_task(row.at("task").get<std::string>());
            a.label = row.at("label").get<std::string>();
            a.majority_fraction = row.at("fraction").get<double>();
            a.size = row.at("size").get<std::size_t>();
            a.labeled_count = row.value("labeled_count", a.size);
            out.push_back(std::move(a));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("attributions line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DomainError& e) {
            throw ParseError("attributions line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace atelier
