// atelier: face-embedding clustering and attribution pipeline.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "atelier/align.hpp"
#include "atelier/attribute.hpp"
#include "atelier/corpus.hpp"
#include "atelier/dbscan.hpp"
#include "atelier/embed.hpp"
#include "atelier/error.hpp"
#include "atelier/metrics.hpp"
#include "atelier/pipeline.hpp"
#include "atelier/synth.hpp"

namespace fs = std::filesystem;
using namespace atelier;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(std::string("cannot open ") + what + " " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    return out;
}

Corpus read_corpus(const std::string& manifest) {
    auto in = open_input(manifest, "manifest");
    return Corpus(parse_manifest(in));
}

struct IngestArgs {
    std::string manifest;
    std::string scan;
    std::string out;
};

int run_ingest(const IngestArgs& a) {
    std::vector<PaintingRecord> records;
    if (!a.manifest.empty()) {
        auto in = open_input(a.manifest, "manifest");
        records = parse_manifest(in);
    } else {
        records = scan_directory(a.scan);
    }
    if (a.out.empty() || a.out == "-") {
        write_manifest(std::cout, records);
    } else {
        auto out = open_output(a.out);
        write_manifest(out, records);
    }
    return 0;
}

struct AlignArgs {
    std::string manifest;
    std::string detections;
    std::string out;
    int margin = kDefaultMargin;
    int size = kDefaultCropSize;
};

int run_align(const AlignArgs& a) {
    const auto corpus = read_corpus(a.manifest);
    auto det_in = open_input(a.detections, "detections");
    const auto detections = parse_detections(det_in);
    const auto faces = align_corpus(corpus, detections, fs::path(a.manifest).parent_path(), a.margin, a.size);
    fs::create_directories(a.out);
    for (const auto& face : faces) {
        write_netpbm(fs::path(a.out) / (face.face_id + (face.crop.channels() == 1 ? ".pgm" : ".ppm")), face.crop);
    }
    std::cerr << "aligned " << faces.size() << " faces into " << a.out << '\n';
    return 0;
}

struct EmbedArgs {
    std::string crops;
    bool mock = false;
    std::string import_file;
    std::string out;
};

int run_embed(const EmbedArgs& a) {
    std::vector<EmbeddingVector> vectors;
    if (!a.import_file.empty()) {
        if (!fs::exists(a.import_file)) {
            throw InputError("embeddings not found: " + a.import_file);
        }
        vectors = load_embeddings(a.import_file);
    } else {
        if (!a.mock) {
            throw InputError("embedding crops requires --mock (no neural embedder is built in)");
        }
        if (!fs::is_directory(a.crops)) {
            throw InputError("crops directory not found: " + a.crops);
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(a.crops)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            vectors.push_back(mock_embed(read_netpbm(file), file.stem().string()));
        }
    }
    save_store(a.out, vectors);
    std::cerr << "wrote " << vectors.size() << " embeddings to " << a.out << '\n';
    return 0;
}

struct SynthArgs {
    std::size_t identities = 6;
    std::size_t faces = 200;
    std::size_t dim = kEmbeddingDim;
    double sigma = 0.05;
    double sep = 0.8;
    std::uint64_t seed = 42;
    std::string out_dir;
};

int run_synth(const SynthArgs& a) {
    const auto spec = SynthSpec::with_default_labels(a.identities, a.faces, a.sigma, a.sep, a.seed, a.dim);
    write_synth_corpus(a.out_dir, generate(spec));
    return 0;
}

struct ClusterArgs {
    std::string embeddings;
    std::string eps = "0.9";
    std::size_t min_pts = kDefaultMinPts;
    std::optional<std::size_t> min_cluster_size;
    std::string index = "auto";
    std::string out;
};

int run_cluster(const ClusterArgs& a) {
    if (!fs::exists(a.embeddings)) {
        throw InputError("embeddings not found: " + a.embeddings);
    }
    TaskClusterConfig cfg;
    cfg.params.min_pts = a.min_pts;
    cfg.params.min_cluster_size = a.min_cluster_size;
    cfg.backend = parse_backend(a.index);
    if (a.eps == "auto") {
        cfg.auto_eps = true;
    } else {
        std::size_t used = 0;
        try {
            cfg.params.eps = std::stod(a.eps, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != a.eps.size()) {
            throw DomainError("--eps must be a number or \"auto\"");
        }
        cfg.params.validate();
    }
    const auto vectors = load_embeddings(a.embeddings);
    const PointMatrix points(vectors);
    const auto params = resolve_params(cfg, points);
    auto result = dbscan(vectors, params, cfg.backend, threads_from_env());
    auto out = open_output(a.out);
    write_clusters(out, result);
    std::cerr << "eps " << params.eps << ": " << result.clusters.size() << " clusters, " << result.noise.size()
              << " noise faces\n";
    return 0;
}

struct AttributeArgs {
    std::string clusters;
    std::string manifest;
    std::string task;
    double threshold = kDefaultMajorityThreshold;
    bool dedupe = false;
    std::string out;
};

int run_attribute(const AttributeArgs& a) {
    const auto task = parse_task(a.task);
    auto clusters_in = open_input(a.clusters, "clusters");
    const auto clustering = read_clusters(clusters_in);
    const auto corpus = read_corpus(a.manifest);
    const auto attributions = attribute_all(clustering.clusters, task, corpus, {a.threshold, a.dedupe});
    auto out = open_output(a.out);
    write_attributions(out, attributions);
    return 0;
}

struct ReportArgs {
    std::string clusters;
    std::string attributions;
    std::string manifest;
    std::string task;
    std::string convention = "paper";
    std::string universe = "all";
    bool include_noise = false;
    std::string out;
    std::string csv;
};

int run_report(const ReportArgs& a) {
    const auto task = parse_task(a.task);
    ReportOptions options;
    options.convention = parse_convention(a.convention);
    if (a.universe == "all") {
        options.universe = Universe::AllFaces;
    } else if (a.universe == "clustered") {
        options.universe = Universe::ClusteredFaces;
    } else {
        throw DomainError("--universe must be all or clustered");
    }
    options.include_noise = a.include_noise;

    auto clusters_in = open_input(a.clusters, "clusters");
    const auto clustering = read_clusters(clusters_in);
    auto attributions_in = open_input(a.attributions, "attributions");
    const auto attributions = read_attributions(attributions_in);
    const auto corpus = read_corpus(a.manifest);
    const auto report = build_task_report(clustering, attributions, corpus, task, options);

    if (!a.out.empty()) {
        open_output(a.out).close();
    }
    if (!a.csv.empty()) {
        open_output(a.csv).close();
    }
    write_report_files(a.out, a.csv.empty() ? std::nullopt : std::optional<fs::path>(a.csv), report);
    if (a.out.empty() && a.csv.empty()) {
        std::cout << report_json(report).dump(2) << '\n';
    }
    return 0;
}

struct RunArgs {
    std::string config;
    std::string output_dir;
    std::string convention;
};

int run_run(const RunArgs& a) {
    auto config = load_config(a.config);
    if (!a.output_dir.empty()) {
        config.output_dir = a.output_dir;
    }
    if (!a.convention.empty()) {
        config.report.convention = parse_convention(a.convention);
    }
    const auto result = run_pipeline(config);
    for (const auto& run : result.runs) {
        std::cerr << task_name(run.task) << ": eps " << run.params.eps << ", " << run.report.n_clusters_total
                  << " clusters, " << run.report.n_clusters_attributed << " attributed\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"atelier: cluster painted faces in embedding space and attribute the clusters"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Normalize a manifest or scan a directory of images");
    auto* ingest_manifest = ingest_cmd->add_option("--manifest", ingest.manifest, "Line-delimited manifest");
    auto* ingest_scan = ingest_cmd->add_option("--scan", ingest.scan, "Directory laid out as <style>/<artist>_<title>[_<year>].<ext>");
    ingest_manifest->excludes(ingest_scan);
    ingest_cmd->add_option("--out", ingest.out, "Output manifest (stdout when omitted)");
    ingest_cmd->callback([&] {
        if (ingest.manifest.empty() && ingest.scan.empty()) {
            throw CLI::ValidationError("ingest", "one of --manifest or --scan is required");
        }
    });

    AlignArgs align;
    auto* align_cmd = app.add_subcommand("align", "Crop detected faces to fixed-size images");
    align_cmd->add_option("--manifest", align.manifest)->required();
    align_cmd->add_option("--detections", align.detections)->required();
    align_cmd->add_option("--out", align.out, "Output directory")->required();
    align_cmd->add_option("--margin", align.margin, "Total margin in pixels")->capture_default_str();
    align_cmd->add_option("--size", align.size, "Output crop size")->capture_default_str();

    EmbedArgs embed;
    auto* embed_cmd = app.add_subcommand("embed", "Embed crops or import external embeddings");
    auto* embed_crops = embed_cmd->add_option("--crops", embed.crops, "Directory of PGM/PPM crops");
    embed_cmd->add_flag("--mock", embed.mock, "Use the deterministic intensity-block embedder");
    auto* embed_import = embed_cmd->add_option("--import", embed.import_file, "Binary or text store to import");
    embed_crops->excludes(embed_import);
    embed_cmd->add_option("--out", embed.out, "Output binary store")->required();
    embed_cmd->callback([&] {
        if (embed.crops.empty() && embed.import_file.empty()) {
            throw CLI::ValidationError("embed", "one of --crops or --import is required");
        }
    });

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-partition embedding corpus");
    synth_cmd->add_option("--identities", synth.identities)->capture_default_str();
    synth_cmd->add_option("--faces", synth.faces, "Faces per identity")->capture_default_str();
    synth_cmd->add_option("--dim", synth.dim)->capture_default_str();
    synth_cmd->add_option("--sigma", synth.sigma, "Intra-identity noise")->capture_default_str();
    synth_cmd->add_option("--sep", synth.sep, "Minimum center separation")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--out-dir", synth.out_dir)->required();

    ClusterArgs cluster;
    auto* cluster_cmd = app.add_subcommand("cluster", "DBSCAN over an embedding store");
    cluster_cmd->add_option("--embeddings", cluster.embeddings)->required();
    cluster_cmd->add_option("--eps", cluster.eps, "Neighborhood radius or \"auto\"")->capture_default_str();
    cluster_cmd->add_option("--min-pts", cluster.min_pts)->capture_default_str();
    cluster_cmd->add_option("--min-cluster-size", cluster.min_cluster_size, "Defaults to --min-pts");
    cluster_cmd->add_option("--index", cluster.index, "brute, tree or auto")->capture_default_str();
    cluster_cmd->add_option("--out", cluster.out)->required();

    AttributeArgs attribute;
    auto* attribute_cmd = app.add_subcommand("attribute", "Name clusters by their majority label");
    attribute_cmd->add_option("--clusters", attribute.clusters)->required();
    attribute_cmd->add_option("--manifest", attribute.manifest)->required();
    attribute_cmd->add_option("--task", attribute.task, "artist, style or year")->required();
    attribute_cmd->add_option("--threshold", attribute.threshold)->capture_default_str();
    attribute_cmd->add_flag("--dedupe-paintings", attribute.dedupe, "Count paintings instead of faces");
    attribute_cmd->add_option("--out", attribute.out)->required();

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Per-cluster and inter-cluster metrics for one task");
    report_cmd->add_option("--clusters", report.clusters)->required();
    report_cmd->add_option("--attributions", report.attributions)->required();
    report_cmd->add_option("--manifest", report.manifest)->required();
    report_cmd->add_option("--task", report.task)->required();
    report_cmd->add_option("--convention", report.convention, "paper or standard")->capture_default_str();
    report_cmd->add_option("--universe", report.universe, "all or clustered")->capture_default_str();
    report_cmd->add_flag("--include-noise", report.include_noise, "Score noise faces as singleton clusters");
    report_cmd->add_option("--out", report.out, "JSON report");
    report_cmd->add_option("--csv", report.csv, "CSV report");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run all three tasks from a config file");
    run_cmd->add_option("--config", run.config)->required();
    run_cmd->add_option("--output-dir", run.output_dir, "Overrides output_dir");
    run_cmd->add_option("--convention", run.convention, "Overrides report.convention");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*ingest_cmd) return run_ingest(ingest);
        if (*align_cmd) return run_align(align);
        if (*embed_cmd) return run_embed(embed);
        if (*synth_cmd) return run_synth(synth);
        if (*cluster_cmd) return run_cluster(cluster);
        if (*attribute_cmd) return run_attribute(attribute);
        if (*report_cmd) return run_report(report);
        if (*run_cmd) return run_run(run);
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
