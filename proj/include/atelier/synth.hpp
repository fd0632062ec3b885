#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "atelier/corpus.hpp"
#include "atelier/embed.hpp"

namespace atelier {

// Planted-partition generator parameters. Styles and year ranges are indexed by identity.
struct SynthSpec {
    std::size_t n_identities = 6;
    std::size_t faces_per_identity = 200;
    std::size_t dim = kEmbeddingDim;
    double intra_sigma = 0.05;
    double min_center_separation = 0.8;
    std::vector<std::string> style_of_identity;
    std::vector<std::pair<int, int>> year_range_of_identity;
    std::uint64_t seed = 42;
    std::size_t max_center_attempts = 10000;  // per identity

    /// Fills styles cyclically from six renaissance/baroque styles and gives identity i
    /// the years [s + 5, s + 44] with s = 1400 + 50 * (i mod 14).
    static SynthSpec with_default_labels(std::size_t n_identities, std::size_t faces_per_identity,
                                         double intra_sigma, double min_center_separation,
                                         std::uint64_t seed, std::size_t dim = kEmbeddingDim);

    void validate() const;
};

struct SynthIdentity {
    std::string artist;
    std::string style;
    std::string year_bin;
    std::vector<double> center;
    std::vector<std::string> face_ids;
};

struct SynthCorpus {
    std::vector<PaintingRecord> manifest;
    std::vector<EmbeddingVector> embeddings;
    std::vector<SynthIdentity> truth;
};

// Random stream with a fixed, implementation-independent definition: std::mt19937_64
// (whose output sequence the standard pins down), 53-bit uniforms from the top bits, and
// one Box-Muller normal per pair of uniforms (cosine branch only).
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

    double uniform();  // [0, 1)
    double normal();
    int uniform_int(int lo, int hi);  // inclusive

private:
    std::mt19937_64 engine_;
};

/// Stream order: identity centers in order, each redrawn until it is at least
/// min_center_separation from all accepted centers; then, identity by identity and face by
/// face, `dim` noise normals followed by one year draw. Throws DomainError when the
/// separation cannot be met within the attempt budget.
SynthCorpus generate(const SynthSpec& spec);

void write_truth(std::ostream& out, const SynthCorpus& corpus);

/// Writes manifest.jsonl, embeddings.femb and truth.jsonl into `dir`.
void write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace atelier
