#include "atelier/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "atelier/align.hpp"
#include "atelier/error.hpp"

namespace atelier {

namespace {

const char* const kDefaultStyles[] = {"early-renaissance", "high-renaissance", "northern-renaissance",
                                      "mannerism",         "baroque",          "rococo"};

std::string padded(std::size_t v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, v);
    return buf;
}

}  // namespace

double SynthRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SynthRng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int SynthRng::uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const auto offset = std::min<std::uint64_t>(static_cast<std::uint64_t>(uniform() * static_cast<double>(span)), span - 1);
    return lo + static_cast<int>(offset);
}

SynthSpec SynthSpec::with_default_labels(std::size_t n_identities, std::size_t faces_per_identity,
                                         double intra_sigma, double min_center_separation,
                                         std::uint64_t seed, std::size_t dim) {
    SynthSpec spec;
    spec.n_identities = n_identities;
    spec.faces_per_identity = faces_per_identity;
    spec.dim = dim;
    spec.intra_sigma = intra_sigma;
    spec.min_center_separation = min_center_separation;
    spec.seed = seed;
    for (std::size_t i = 0; i < n_identities; ++i) {
        spec.style_of_identity.emplace_back(kDefaultStyles[i % std::size(kDefaultStyles)]);
        const int start = 1400 + kYearBinWidth * static_cast<int>(i % 14);
        spec.year_range_of_identity.emplace_back(start + 5, start + 44);
    }
    return spec;
}

void SynthSpec::validate() const {
    if (n_identities == 0 || faces_per_identity == 0 || dim == 0) {
        throw DomainError("identities, faces per identity and dimension must be positive");
    }
    if (!std::isfinite(intra_sigma) || intra_sigma < 0.0) {
        throw DomainError("intra_sigma must be finite and >= 0");
    }
    if (!std::isfinite(min_center_separation) || min_center_separation <= 0.0) {
        throw DomainError("min_center_separation must be finite and > 0");
    }
    if (style_of_identity.size() != n_identities || year_range_of_identity.size() != n_identities) {
        throw DomainError("every identity needs a style and a year range");
    }
    for (const auto& style : style_of_identity) {
        if (style.empty() || style.find('/') != std::string::npos) {
            throw DomainError("style names must be non-empty and free of path separators");
        }
    }
    for (const auto& [lo, hi] : year_range_of_identity) {
        if (lo > hi || lo < kMinYear || hi > kMaxYear) {
            throw DomainError("year ranges need lo <= hi within [1000, 2100]");
        }
    }
    if (max_center_attempts == 0) {
        throw DomainError("max_center_attempts must be positive");
    }
}

SynthCorpus generate(const SynthSpec& spec) {
    spec.validate();
    SynthRng rng(spec.seed);
    SynthCorpus out;

    auto draw_direction = [&] {
        std::vector<double> v(spec.dim);
        while (true) {
            for (auto& x : v) {
                x = rng.normal();
            }
            try {
                return normalize(v);
            } catch (const ZeroVectorError&) {
            }
        }
    };

    std::vector<std::vector<double>> centers;
    for (std::size_t i = 0; i < spec.n_identities; ++i) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < spec.max_center_attempts && !placed; ++attempt) {
            auto candidate = draw_direction();
            placed = std::all_of(centers.begin(), centers.end(), [&](const auto& c) {
                return euclidean(c, candidate) >= spec.min_center_separation;
            });
            if (placed) {
                centers.push_back(std::move(candidate));
            }
        }
        if (!placed) {
            throw DomainError("cannot place identity " + std::to_string(i) + " at separation " +
                              std::to_string(spec.min_center_separation) + " in " + std::to_string(spec.dim) +
                              " dimensions within " + std::to_string(spec.max_center_attempts) + " attempts");
        }
    }

    const int id_width = spec.n_identities > 100 ? static_cast<int>(std::to_string(spec.n_identities - 1).size()) : 2;
    const int face_width = std::max<int>(4, static_cast<int>(std::to_string(spec.faces_per_identity - 1).size()));
    std::vector<double> face(spec.dim);
    for (std::size_t i = 0; i < spec.n_identities; ++i) {
        SynthIdentity identity;
        identity.artist = "artist-" + padded(i, id_width);
        identity.style = spec.style_of_identity[i];
        const auto [lo, hi] = spec.year_range_of_identity[i];
        identity.year_bin = year_bin(lo).label;
        identity.center = centers[i];
        for (std::size_t f = 0; f < spec.faces_per_identity; ++f) {
            for (std::size_t d = 0; d < spec.dim; ++d) {
                face[d] = centers[i][d] + spec.intra_sigma * rng.normal();
            }
            const int year = rng.uniform_int(lo, hi);

            PaintingRecord rec;
            rec.painting_id = "id" + padded(i, id_width) + "-" + padded(f, face_width);
            rec.artist = identity.artist;
            rec.title = "portrait-" + padded(f, face_width);
            rec.style = identity.style;
            rec.year = year;
            rec.source_path = render_filename({rec.artist, rec.title, rec.style, rec.year}, ".png");
            const auto face_id = face_id_for(rec.painting_id, 0);
            out.embeddings.push_back({face_id, normalize(face)});
            identity.face_ids.push_back(face_id);
            out.manifest.push_back(std::move(rec));
        }
        out.truth.push_back(std::move(identity));
    }
    return out;
}

void write_truth(std::ostream& out, const SynthCorpus& corpus) {
    for (const auto& identity : corpus.truth) {
        nlohmann::ordered_json row;
        row["artist"] = identity.artist;
        row["style"] = identity.style;
        row["year_bin"] = identity.year_bin;
        row["faces"] = identity.face_ids.size();
        out << row.dump() << '\n';
    }
}

void write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream manifest(dir / "manifest.jsonl");
        if (!manifest) {
            throw InputError("cannot write " + (dir / "manifest.jsonl").string());
        }
        write_manifest(manifest, corpus.manifest);
    }
    save_store(dir / "embeddings.femb", corpus.embeddings);
    std::ofstream truth(dir / "truth.jsonl");
    if (!truth) {
        throw InputError("cannot write " + (dir / "truth.jsonl").string());
    }
    write_truth(truth, corpus);
}

}  // namespace atelier
