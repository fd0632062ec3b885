#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "atelier/align.hpp"
#include "atelier/error.hpp"

namespace atelier {

inline constexpr std::size_t kEmbeddingDim = 128;
inline constexpr std::uint32_t kStoreVersion = 1;

class ZeroVectorError : public DomainError {
public:
    ZeroVectorError() : DomainError("cannot normalize a zero vector") {}
};

struct EmbeddingVector {
    std::string face_id;
    std::vector<double> v;

    std::size_t dim() const { return v.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

// Dense row-major n x dim matrix of points.
class PointMatrix {
public:
    PointMatrix() = default;
    PointMatrix(std::size_t n, std::size_t dim) : n_(n), dim_(dim), data_(n * dim, 0.0) {}
    explicit PointMatrix(const std::vector<EmbeddingVector>& vectors);
    static PointMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return n_ == 0; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

private:
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// v / ||v||_2. Throws ZeroVectorError when the norm is zero, DomainError when empty
/// or non-finite.
std::vector<double> normalize(std::span<const double> v);

/// Throws DomainError on length mismatch.
double euclidean(std::span<const double> a, std::span<const double> b);
double euclidean(const EmbeddingVector& a, const EmbeddingVector& b);

namespace detail {
// Shared by every neighbor-search path so closed-ball tests agree bit-for-bit.
inline double distance_unchecked(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}
}  // namespace detail

/// Deterministic intensity-block embedder for 160x160 crops. Grayscale by channel mean,
/// 16 x 8 grid of 10x20 blocks in column-major block order, block mean minus global
/// mean, unit-normalized. Constant crops map to e1.
EmbeddingVector mock_embed(const PixelGrid& crop, std::string face_id = {});

/// Binary store: "FEMB", u32 version, u32 dim, then per record u16 id length, id bytes,
/// dim little-endian f64. Throws DomainError when dimensions differ.
std::vector<std::uint8_t> write_store(const std::vector<EmbeddingVector>& vectors);

/// Throws FormatError with the byte offset of bad magic, version, or truncation.
/// An empty store decodes with dimension taken from the header.
std::vector<EmbeddingVector> read_store(std::span<const std::uint8_t> bytes);

/// Text store: `face_id v1 v2 ...` per line.
std::vector<EmbeddingVector> read_text_store(std::istream& in);
void write_text_store(std::ostream& out, const std::vector<EmbeddingVector>& vectors);

/// Reads a binary or text store (sniffed by magic) and renormalizes every vector.
std::vector<EmbeddingVector> load_embeddings(const std::filesystem::path& file);
void save_store(const std::filesystem::path& file, const std::vector<EmbeddingVector>& vectors);

}  // namespace atelier
