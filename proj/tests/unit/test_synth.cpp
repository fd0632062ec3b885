#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"

#include "atelier/dbscan.hpp"
#include "atelier/error.hpp"
#include "atelier/synth.hpp"

using namespace atelier;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("SynthRng stream is pinned") {
    // std::mt19937_64 seeded with 5489 yields 9981545732273789042 as its 10000th output.
    std::mt19937_64 reference;
    reference.discard(9999);
    CHECK(reference() == 9981545732273789042ULL);

    SynthRng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    SynthRng c(7);
    for (int i = 0; i < 1000; ++i) {
        const int y = c.uniform_int(1605, 1644);
        CHECK(y >= 1605);
        CHECK(y <= 1644);
    }
}

TEST_CASE("SynthRng normals have unit variance") {
    SynthRng rng(1);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("generate cardinality and labels") {
    const auto spec = SynthSpec::with_default_labels(6, 200, 0.05, 0.8, 42);
    const auto corpus = generate(spec);
    CHECK(corpus.manifest.size() == 1200);
    CHECK(corpus.embeddings.size() == 1200);
    REQUIRE(corpus.truth.size() == 6);
    for (const auto& e : corpus.embeddings) {
        double s = 0.0;
        for (double x : e.v) s += x * x;
        CHECK(std::abs(std::sqrt(s) - 1.0) < 1e-6);
    }
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& t = corpus.truth[i];
        CHECK(t.face_ids.size() == 200);
        for (std::size_t j = 0; j < i; ++j) CHECK(euclidean(t.center, corpus.truth[j].center) >= 0.8);
    }
    for (std::size_t f = 0; f < corpus.manifest.size(); ++f) {
        const auto& rec = corpus.manifest[f];
        const auto& t = corpus.truth[f / 200];
        CHECK(rec.artist == t.artist);
        CHECK(rec.style == t.style);
        REQUIRE(rec.year.has_value());
        CHECK(year_bin(*rec.year).label == t.year_bin);
        CHECK(parse_filename(rec.source_path) == ParsedFilename{rec.artist, rec.title, rec.style, rec.year});
    }
}

TEST_CASE("generate is byte-for-byte deterministic") {
    const auto spec = SynthSpec::with_default_labels(4, 30, 0.1, 0.8, 99);
    const auto root = std::filesystem::temp_directory_path() / "atelier_synth_det";
    std::filesystem::remove_all(root);
    write_synth_corpus(root / "a", generate(spec));
    write_synth_corpus(root / "b", generate(spec));
    for (const char* name : {"manifest.jsonl", "embeddings.femb", "truth.jsonl"}) {
        CHECK(slurp(root / "a" / name) == slurp(root / "b" / name));
        CHECK_FALSE(slurp(root / "a" / name).empty());
    }
    auto other = spec;
    other.seed = 100;
    CHECK(generate(other).embeddings != generate(spec).embeddings);
    std::filesystem::remove_all(root);
}

TEST_CASE("zero noise collapses every identity onto its center") {
    const auto spec = SynthSpec::with_default_labels(6, 200, 0.0, 0.8, 42);
    const auto corpus = generate(spec);
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& first = corpus.embeddings[i * 200];
        CHECK(euclidean(first.v, corpus.truth[i].center) < 1e-12);
    }
    for (double eps : {1e-6, 0.1, 0.5}) {
        for (std::size_t min_pts : {1u, 25u, 200u}) {
            const auto result = dbscan(corpus.embeddings, {eps, min_pts, std::nullopt});
            REQUIRE(result.clusters.size() == 6);
            CHECK(result.noise.empty());
            for (std::size_t i = 0; i < 6; ++i) CHECK(result.clusters[i] == corpus.truth[i].face_ids);
        }
    }
}

TEST_CASE("spec validation and infeasible separation") {
    auto spec = SynthSpec::with_default_labels(3, 5, 0.1, 0.8, 1);
    spec.year_range_of_identity[1] = {1700, 1600};
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = SynthSpec::with_default_labels(3, 5, 0.1, 0.0, 1);
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = SynthSpec::with_default_labels(3, 5, -0.1, 0.5, 1);
    CHECK_THROWS_AS(spec.validate(), DomainError);

    // Three points on a circle cannot be pairwise 1.9 apart.
    auto tight = SynthSpec::with_default_labels(3, 5, 0.1, 1.9, 1, 2);
    tight.max_center_attempts = 200;
    CHECK_THROWS_AS(generate(tight), DomainError);
}

TEST_CASE("truth file lists identities") {
    const auto corpus = generate(SynthSpec::with_default_labels(2, 3, 0.1, 0.5, 5));
    std::ostringstream out;
    write_truth(out, corpus);
    CHECK(out.str() ==
          "{\"artist\":\"artist-00\",\"style\":\"early-renaissance\",\"year_bin\":\"1400-1450\",\"faces\":3}\n"
          "{\"artist\":\"artist-01\",\"style\":\"high-renaissance\",\"year_bin\":\"1450-1500\",\"faces\":3}\n");
}
