#include "atelier/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "atelier/error.hpp"

namespace atelier {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

void require_same_length(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) {
        throw DomainError("cluster and class assignments differ in length");
    }
}

struct Coded {
    std::vector<std::size_t> cluster_of;
    std::vector<std::size_t> class_of;
};

Coded encode(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels) {
    Coded coded;
    std::map<std::string, std::size_t> class_codes;
    std::unordered_set<std::string> seen;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        for (const auto& id : clusters[k]) {
            if (!seen.insert(id).second) {
                throw DomainError("item \"" + id + "\" appears in more than one cluster");
            }
            auto it = labels.find(id);
            if (it == labels.end()) {
                throw DomainError("item \"" + id + "\" has no label");
            }
            const auto code = class_codes.emplace(it->second, class_codes.size()).first->second;
            coded.cluster_of.push_back(k);
            coded.class_of.push_back(code);
        }
    }
    return coded;
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

nlohmann::ordered_json metrics_json(const ClusterMetrics& m) {
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f_measure"] = m.f_measure;
    return j;
}

nlohmann::ordered_json counts_json(const ConfusionCounts& c) {
    nlohmann::ordered_json j;
    j["tp"] = c.tp;
    j["fp"] = c.fp;
    j["tn"] = c.tn;
    j["fn"] = c.fn;
    return j;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

Convention parse_convention(const std::string& name) {
    if (name == "paper") return Convention::Paper;
    if (name == "standard") return Convention::Standard;
    throw DomainError("unknown metric convention \"" + name + "\" (expected paper or standard)");
}

const char* convention_name(Convention convention) {
    return convention == Convention::Paper ? "paper" : "standard";
}

const char* convention_note(Convention convention) {
    return convention == Convention::Paper
               ? "precision = TP/(TP+FN), recall = TP/(TP+FP); swapped relative to the standard "
                 "definitions, f_measure unaffected"
               : "precision = TP/(TP+FP), recall = TP/(TP+FN)";
}

double f_measure(double precision, double recall) {
    const double sum = precision + recall;
    return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

ConfusionCounts confusion_counts(const std::vector<std::string>& cluster,
                                 const std::unordered_set<std::string>& label_members,
                                 const std::vector<std::string>& universe) {
    const std::unordered_set<std::string> universe_set(universe.begin(), universe.end());
    std::unordered_set<std::string> cluster_set;
    ConfusionCounts c;
    for (const auto& id : cluster) {
        if (!universe_set.count(id)) {
            throw DomainError("cluster member \"" + id + "\" is outside the universe");
        }
        if (!cluster_set.insert(id).second) {
            continue;
        }
        if (label_members.count(id)) {
            ++c.tp;
        } else {
            ++c.fp;
        }
    }
    std::uint64_t members_in_universe = 0;
    for (const auto& id : universe_set) {
        members_in_universe += label_members.count(id);
    }
    c.fn = members_in_universe - c.tp;
    c.tn = universe_set.size() - c.tp - c.fp - c.fn;
    return c;
}

ConfusionCounts confusion_counts(const std::vector<std::string>& cluster, const std::string& label,
                                 Task task, const std::vector<std::string>& universe,
                                 const Corpus& corpus) {
    if (label.empty()) {
        throw DomainError("label must be non-empty");
    }
    const auto labels = face_labels(universe, task, corpus);
    std::unordered_set<std::string> members;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if (labels[i] && *labels[i] == label) {
            members.insert(universe[i]);
        }
    }
    return confusion_counts(cluster, members, universe);
}

ClusterMetrics cluster_metrics(const ConfusionCounts& c, Convention convention) {
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    ClusterMetrics m;
    m.accuracy = ratio(tp + static_cast<double>(c.tn), static_cast<double>(c.total()));
    if (convention == Convention::Paper) {
        m.precision = ratio(tp, tp + fn);
        m.recall = ratio(tp, tp + fp);
    } else {
        m.precision = ratio(tp, tp + fp);
        m.recall = ratio(tp, tp + fn);
    }
    m.f_measure = f_measure(m.precision, m.recall);
    return m;
}

ContingencyTable::ContingencyTable(std::span<const std::size_t> cluster_of,
                                   std::span<const std::size_t> class_of) {
    require_same_length(cluster_of, class_of);
    std::map<std::size_t, std::size_t> cluster_codes;
    std::map<std::size_t, std::size_t> class_codes;
    for (std::size_t v : cluster_of) cluster_codes.emplace(v, 0);
    for (std::size_t v : class_of) class_codes.emplace(v, 0);
    std::size_t next = 0;
    for (auto& [_, code] : cluster_codes) code = next++;
    next = 0;
    for (auto& [_, code] : class_codes) code = next++;

    cluster_sizes_.assign(cluster_codes.size(), 0);
    class_sizes_.assign(class_codes.size(), 0);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
    for (std::size_t i = 0; i < cluster_of.size(); ++i) {
        const auto k = cluster_codes[cluster_of[i]];
        const auto j = class_codes[class_of[i]];
        ++cluster_sizes_[k];
        ++class_sizes_[j];
        ++cells[{k, j}];
    }
    total_ = cluster_of.size();
    cells_.reserve(cells.size());
    for (const auto& [key, count] : cells) {
        cells_.emplace_back(key.first, key.second, count);
    }
}

double purity(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of) {
    const ContingencyTable table(cluster_of, class_of);
    if (table.total() == 0) {
        throw DomainError("purity of an empty clustering is undefined");
    }
    std::vector<std::size_t> best(table.cluster_sizes().size(), 0);
    for (const auto& [k, j, n] : table.cells()) {
        best[k] = std::max(best[k], n);
    }
    std::size_t sum = 0;
    for (auto b : best) sum += b;
    return static_cast<double>(sum) / static_cast<double>(table.total());
}

double nmi(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of) {
    const ContingencyTable table(cluster_of, class_of);
    if (table.total() == 0) {
        throw DomainError("NMI of an empty clustering is undefined");
    }
    const double n = static_cast<double>(table.total());
    auto entropy = [n](const std::vector<std::size_t>& sizes) {
        double h = 0.0;
        for (auto s : sizes) {
            if (s > 0) {
                const double p = static_cast<double>(s) / n;
                h -= p * std::log(p);
            }
        }
        return h;
    };
    const double h_clusters = entropy(table.cluster_sizes());
    const double h_classes = entropy(table.class_sizes());
    if (h_clusters + h_classes == 0.0) {
        // One cluster and one class: the partitions coincide.
        return 1.0;
    }
    double mutual = 0.0;
    for (const auto& [k, j, count] : table.cells()) {
        const double c = static_cast<double>(count);
        mutual += (c / n) * std::log(n * c / (static_cast<double>(table.cluster_sizes()[k]) *
                                              static_cast<double>(table.class_sizes()[j])));
    }
    return std::clamp(mutual / ((h_clusters + h_classes) / 2.0), 0.0, 1.0);
}

PairCounts pair_counts(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of) {
    const ContingencyTable table(cluster_of, class_of);
    if (table.total() < 2) {
        throw DomainError("pair counts need at least two items");
    }
    std::uint64_t same_both = 0;
    for (const auto& [k, j, count] : table.cells()) {
        same_both += choose2(count);
    }
    std::uint64_t same_cluster = 0;
    for (auto s : table.cluster_sizes()) same_cluster += choose2(s);
    std::uint64_t same_class = 0;
    for (auto s : table.class_sizes()) same_class += choose2(s);

    PairCounts p;
    p.tp = same_both;
    p.fp = same_cluster - same_both;
    p.fn = same_class - same_both;
    p.tn = choose2(table.total()) - p.tp - p.fp - p.fn;
    return p;
}

double rand_index(std::span<const std::size_t> cluster_of, std::span<const std::size_t> class_of) {
    const auto p = pair_counts(cluster_of, class_of);
    return static_cast<double>(p.tp + p.tn) / static_cast<double>(p.total());
}

double purity(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels) {
    const auto c = encode(clusters, labels);
    return purity(c.cluster_of, c.class_of);
}

double nmi(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels) {
    const auto c = encode(clusters, labels);
    return nmi(c.cluster_of, c.class_of);
}

PairCounts pair_counts(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels) {
    const auto c = encode(clusters, labels);
    return pair_counts(c.cluster_of, c.class_of);
}

double rand_index(const std::vector<std::vector<std::string>>& clusters, const LabelMap& labels) {
    const auto c = encode(clusters, labels);
    return rand_index(c.cluster_of, c.class_of);
}

TaskReport build_task_report(const ClusteringResult& clustering,
                             const std::vector<ClusterAttribution>& attributions,
                             const Corpus& corpus, Task task, const ReportOptions& options) {
    TaskReport report;
    report.task = task;
    report.convention = options.convention;
    report.n_clusters_total = clustering.clusters.size();
    report.n_clusters_attributed = attributions.size();

    std::vector<std::string> universe;
    if (options.universe == Universe::AllFaces) {
        universe = clustering.face_order;
    } else {
        for (const auto& cluster : clustering.clusters) {
            universe.insert(universe.end(), cluster.begin(), cluster.end());
        }
    }
    report.universe_size = universe.size();

    const auto universe_labels = face_labels(universe, task, corpus);
    std::map<std::string, std::unordered_set<std::string>> members_of;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if (universe_labels[i]) {
            members_of[*universe_labels[i]].insert(universe[i]);
        }
    }
    const std::unordered_set<std::string> no_members;
    auto members_for = [&](const std::string& label) -> const std::unordered_set<std::string>& {
        auto it = members_of.find(label);
        return it == members_of.end() ? no_members : it->second;
    };

    std::vector<ClusterAttribution> filled;
    filled.reserve(attributions.size());
    for (const auto& a : attributions) {
        if (a.task != task) {
            throw DomainError(std::string("attribution for task ") + task_name(a.task) +
                              " passed to a " + task_name(task) + " report");
        }
        if (a.cluster_id < 0 || static_cast<std::size_t>(a.cluster_id) >= clustering.clusters.size()) {
            throw IntegrityError("attribution names unknown cluster " + std::to_string(a.cluster_id));
        }
        auto copy = a;
        copy.members = clustering.clusters[static_cast<std::size_t>(a.cluster_id)];
        ReportRow row;
        row.cluster_id = a.cluster_id;
        row.label = a.label;
        row.size = copy.members.size();
        row.counts = confusion_counts(copy.members, members_for(a.label), universe);
        row.metrics = cluster_metrics(row.counts, options.convention);
        report.rows.push_back(std::move(row));
        filled.push_back(std::move(copy));
    }

    if (!report.rows.empty()) {
        ClusterMetrics avg;
        for (const auto& row : report.rows) {
            avg.accuracy += row.metrics.accuracy;
            avg.precision += row.metrics.precision;
            avg.recall += row.metrics.recall;
            avg.f_measure += row.metrics.f_measure;
        }
        const double n = static_cast<double>(report.rows.size());
        avg.accuracy /= n;
        avg.precision /= n;
        avg.recall /= n;
        avg.f_measure /= n;
        report.averages = avg;

        std::map<std::string, std::size_t> clusters_per_label;
        for (const auto& a : filled) {
            ++clusters_per_label[a.label];
        }
        double accuracy_sum = 0.0;
        for (const auto& [label, group] : merge_by_label(filled)) {
            GroupRow g;
            g.label = label;
            g.n_clusters = clusters_per_label[label];
            g.size = group.size();
            g.counts = confusion_counts(group, members_for(label), universe);
            g.metrics = cluster_metrics(g.counts, options.convention);
            accuracy_sum += g.metrics.accuracy;
            report.merged.push_back(std::move(g));
        }
        report.task_accuracy = accuracy_sum / static_cast<double>(report.merged.size());
    }

    // Inter-cluster metrics over clustered faces that carry a label for this task.
    std::vector<std::size_t> cluster_of;
    std::vector<std::size_t> class_of;
    std::map<std::string, std::size_t> class_codes;
    auto add_item = [&](const std::string& face, std::size_t cluster) {
        const auto label = task_label(*corpus.find(painting_of_face(face)), task);
        if (!label) {
            return;
        }
        cluster_of.push_back(cluster);
        class_of.push_back(class_codes.emplace(*label, class_codes.size()).first->second);
    };
    for (std::size_t k = 0; k < clustering.clusters.size(); ++k) {
        face_labels(clustering.clusters[k], task, corpus);  // integrity check
        for (const auto& face : clustering.clusters[k]) {
            add_item(face, k);
        }
    }
    if (options.include_noise) {
        face_labels(clustering.noise, task, corpus);
        std::size_t next = clustering.clusters.size();
        for (const auto& face : clustering.noise) {
            add_item(face, next++);
        }
    }
    report.n_scored_faces = cluster_of.size();
    if (!cluster_of.empty()) {
        report.purity = purity(cluster_of, class_of);
        report.nmi = nmi(cluster_of, class_of);
    }
    if (cluster_of.size() >= 2) {
        report.rand_index = rand_index(cluster_of, class_of);
    }
    return report;
}

nlohmann::ordered_json report_json(const TaskReport& report) {
    nlohmann::ordered_json j;
    j["task"] = task_name(report.task);
    j["convention"] = convention_name(report.convention);
    j["convention_note"] = convention_note(report.convention);
    j["n_clusters_total"] = report.n_clusters_total;
    j["n_clusters_attributed"] = report.n_clusters_attributed;
    j["universe_size"] = report.universe_size;

    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json r;
        r["cluster_id"] = row.cluster_id;
        r["label"] = row.label;
        r["size"] = row.size;
        r["counts"] = counts_json(row.counts);
        r["metrics"] = metrics_json(row.metrics);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["averages"] = report.averages ? metrics_json(*report.averages) : nlohmann::ordered_json(nullptr);

    auto groups = nlohmann::ordered_json::array();
    for (const auto& g : report.merged) {
        nlohmann::ordered_json r;
        r["label"] = g.label;
        r["n_clusters"] = g.n_clusters;
        r["size"] = g.size;
        r["counts"] = counts_json(g.counts);
        r["metrics"] = metrics_json(g.metrics);
        groups.push_back(std::move(r));
    }
    j["merged_groups"] = std::move(groups);

    nlohmann::ordered_json summary;
    summary["n_clusters"] = report.n_clusters_attributed;
    summary["accuracy"] = optional_json(report.task_accuracy);
    summary["purity"] = optional_json(report.purity);
    summary["nmi"] = optional_json(report.nmi);
    summary["rand_index"] = optional_json(report.rand_index);
    summary["n_scored_faces"] = report.n_scored_faces;
    j["summary"] = std::move(summary);
    return j;
}

void write_report_csv(std::ostream& out, const TaskReport& report) {
    out << "# task: " << task_name(report.task) << "; convention: " << convention_name(report.convention)
        << " (" << convention_note(report.convention) << ")\n";
    out << "label,accuracy,precision,recall,f_measure,cluster_id,size\n";
    for (const auto& row : report.rows) {
        out << csv_field(row.label) << ',' << fmt6(row.metrics.accuracy) << ','
            << fmt6(row.metrics.precision) << ',' << fmt6(row.metrics.recall) << ','
            << fmt6(row.metrics.f_measure) << ',' << row.cluster_id << ',' << row.size << '\n';
    }
    if (report.averages) {
        const auto& a = *report.averages;
        out << "average," << fmt6(a.accuracy) << ',' << fmt6(a.precision) << ',' << fmt6(a.recall)
            << ',' << fmt6(a.f_measure) << ",,\n";
    }
    out << '\n';
    out << "task,n_clusters,n_clusters_total,accuracy,purity,nmi,rand_index\n";
    out << task_name(report.task) << ',' << report.n_clusters_attributed << ',' << report.n_clusters_total
        << ',' << fmt_opt(report.task_accuracy) << ',' << fmt_opt(report.purity) << ','
        << fmt_opt(report.nmi) << ',' << fmt_opt(report.rand_index) << '\n';
}

}  // namespace atelier
