#include "atelier/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace atelier {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'M', 'B'};
constexpr int kGridCols = 16;
constexpr int kGridRows = 8;
constexpr int kBlockWidth = 10;
constexpr int kBlockHeight = 20;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
        v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
    }
    return v;
}

}  // namespace

PointMatrix::PointMatrix(const std::vector<EmbeddingVector>& vectors)
    : n_(vectors.size()), dim_(vectors.empty() ? 0 : vectors.front().dim()) {
    data_.reserve(n_ * dim_);
    for (const auto& e : vectors) {
        if (e.dim() != dim_) {
            throw DomainError("embedding \"" + e.face_id + "\" has dimension " +
                              std::to_string(e.dim()) + ", expected " + std::to_string(dim_));
        }
        data_.insert(data_.end(), e.v.begin(), e.v.end());
    }
}

PointMatrix PointMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    PointMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.dim_) {
            throw DomainError("row " + std::to_string(i) + " has mismatched dimension");
        }
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

std::vector<double> normalize(std::span<const double> v) {
    if (v.empty()) {
        throw DomainError("cannot normalize an empty vector");
    }
    double sum = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw DomainError("cannot normalize a vector with non-finite components");
        }
        sum += x * x;
    }
    if (sum == 0.0) {
        throw ZeroVectorError();
    }
    const double norm = std::sqrt(sum);
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) {
        x /= norm;
    }
    return out;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DomainError("distance between vectors of dimension " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
    }
    return detail::distance_unchecked(a, b);
}

double euclidean(const EmbeddingVector& a, const EmbeddingVector& b) {
    return euclidean(std::span<const double>(a.v), std::span<const double>(b.v));
}

EmbeddingVector mock_embed(const PixelGrid& crop, std::string face_id) {
    if (crop.width() != kDefaultCropSize || crop.height() != kDefaultCropSize) {
        throw DomainError("mock embedder expects a 160x160 crop, got " + std::to_string(crop.width()) +
                          "x" + std::to_string(crop.height()));
    }
    // Integer channel sums keep gray and equal-valued RGB crops bit-identical.
    const int channels = crop.channels();
    std::vector<std::uint64_t> block_sum(kGridCols * kGridRows, 0);
    std::uint64_t total = 0;
    for (int y = 0; y < crop.height(); ++y) {
        const int row = y / kBlockHeight;
        for (int x = 0; x < crop.width(); ++x) {
            const int col = x / kBlockWidth;
            std::uint64_t s = 0;
            for (int c = 0; c < channels; ++c) {
                s += crop.at(x, y, c);
            }
            block_sum[col * kGridRows + row] += s;
            total += s;
        }
    }
    const double block_div = static_cast<double>(kBlockWidth * kBlockHeight * channels);
    const double global_mean =
        static_cast<double>(total) / (static_cast<double>(crop.width()) * crop.height() * channels);

    EmbeddingVector out{std::move(face_id), std::vector<double>(block_sum.size())};
    bool all_zero = true;
    for (std::size_t i = 0; i < block_sum.size(); ++i) {
        out.v[i] = static_cast<double>(block_sum[i]) / block_div - global_mean;
        all_zero = all_zero && out.v[i] == 0.0;
    }
    if (all_zero) {
        std::fill(out.v.begin(), out.v.end(), 0.0);
        out.v[0] = 1.0;
        return out;
    }
    out.v = normalize(out.v);
    return out;
}

std::vector<std::uint8_t> write_store(const std::vector<EmbeddingVector>& vectors) {
    const std::size_t dim = vectors.empty() ? 0 : vectors.front().dim();
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, kStoreVersion);
    put_u32(out, static_cast<std::uint32_t>(dim));
    for (const auto& e : vectors) {
        if (e.dim() != dim) {
            throw DomainError("store records must share one dimension; \"" + e.face_id + "\" has " +
                              std::to_string(e.dim()));
        }
        if (e.face_id.size() > 0xFFFF) {
            throw DomainError("face id longer than 65535 bytes");
        }
        put_u16(out, static_cast<std::uint16_t>(e.face_id.size()));
        out.insert(out.end(), e.face_id.begin(), e.face_id.end());
        for (double x : e.v) {
            put_u64(out, std::bit_cast<std::uint64_t>(x));
        }
    }
    return out;
}

std::vector<EmbeddingVector> read_store(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin(),
                                        [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
        throw FormatError("bad magic, expected \"FEMB\"", 0);
    }
    if (bytes.size() < 12) {
        throw FormatError("truncated header", bytes.size());
    }
    const auto version = get_le(bytes, 4, 4);
    if (version != kStoreVersion) {
        throw FormatError("unsupported store version " + std::to_string(version), 4);
    }
    const std::size_t dim = get_le(bytes, 8, 4);

    std::vector<EmbeddingVector> out;
    std::size_t offset = 12;
    while (offset < bytes.size()) {
        if (dim == 0) {
            throw FormatError("record present in a zero-dimension store", offset);
        }
        if (bytes.size() - offset < 2) {
            throw FormatError("truncated record id length", offset);
        }
        const std::size_t id_len = get_le(bytes, offset, 2);
        offset += 2;
        if (bytes.size() - offset < id_len) {
            throw FormatError("truncated record id", offset);
        }
        EmbeddingVector e;
        e.face_id.assign(reinterpret_cast<const char*>(bytes.data() + offset), id_len);
        offset += id_len;
        if (bytes.size() - offset < dim * 8) {
            throw FormatError("truncated payload for \"" + e.face_id + "\"", offset);
        }
        e.v.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            e.v[i] = std::bit_cast<double>(get_le(bytes, offset, 8));
            offset += 8;
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<EmbeddingVector> read_text_store(std::istream& in) {
    std::vector<EmbeddingVector> out;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t line_offset = offset;
        offset += line.size() + 1;
        std::istringstream fields(line);
        EmbeddingVector e;
        if (!(fields >> e.face_id)) {
            continue;
        }
        std::string token;
        while (fields >> token) {
            std::size_t used = 0;
            double x = 0.0;
            try {
                x = std::stod(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != token.size()) {
                throw FormatError("bad number \"" + token + "\" for \"" + e.face_id + "\"", line_offset);
            }
            e.v.push_back(x);
        }
        if (e.v.empty()) {
            throw FormatError("record \"" + e.face_id + "\" has no components", line_offset);
        }
        if (!out.empty() && e.v.size() != out.front().v.size()) {
            throw FormatError("dimension mismatch: \"" + e.face_id + "\" has " + std::to_string(e.v.size()) +
                                  " components, expected " + std::to_string(out.front().v.size()),
                              line_offset);
        }
        out.push_back(std::move(e));
    }
    return out;
}

void write_text_store(std::ostream& out, const std::vector<EmbeddingVector>& vectors) {
    char buf[32];
    for (const auto& e : vectors) {
        out << e.face_id;
        for (double x : e.v) {
            std::snprintf(buf, sizeof buf, " %.17g", x);
            out << buf;
        }
        out << '\n';
    }
}

std::vector<EmbeddingVector> load_embeddings(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw InputError("cannot open embeddings " + file.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<EmbeddingVector> vectors;
    if (bytes.size() >= 4 && std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        vectors = read_store(bytes);
    } else {
        std::istringstream text(std::string(bytes.begin(), bytes.end()));
        vectors = read_text_store(text);
    }
    for (auto& e : vectors) {
        e.v = normalize(e.v);
    }
    return vectors;
}

void save_store(const std::filesystem::path& file, const std::vector<EmbeddingVector>& vectors) {
    const auto bytes = write_store(vectors);
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw InputError("cannot write embeddings " + file.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace atelier
