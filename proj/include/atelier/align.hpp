#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace atelier {

inline constexpr int kDefaultCropSize = 160;
inline constexpr int kDefaultMargin = 32;

struct BBox {
    int x1 = 0;
    int y1 = 0;
    int x2 = 0;
    int y2 = 0;

    int width() const { return x2 - x1; }
    int height() const { return y2 - y1; }
    bool operator==(const BBox&) const = default;
};

// Row-major 8-bit image, 1 (gray) or 3 (RGB) channels.
class PixelGrid {
public:
    PixelGrid() = default;
    PixelGrid(int width, int height, int channels, std::uint8_t fill = 0);
    PixelGrid(int width, int height, int channels, std::vector<std::uint8_t> samples);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    const std::vector<std::uint8_t>& samples() const { return samples_; }

    std::uint8_t at(int x, int y, int c = 0) const {
        return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    bool operator==(const PixelGrid&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> samples_;
};

// One row of the detections sidecar.
struct Detection {
    std::string painting_id;
    int face_index = 0;
    BBox bbox;
};

struct FaceInstance {
    std::string face_id;
    std::string painting_id;
    BBox bbox;
    PixelGrid crop;
};

/// Moves every side outward by margin/2, then clamps to [0, img_w] x [0, img_h].
/// Throws DomainError for a degenerate or out-of-image box, or a negative/odd margin.
BBox expand_and_clamp(const BBox& bbox, int margin, int img_w, int img_h);

/// Bilinear, corner-aligned resampling of the bbox region to out_size x out_size.
PixelGrid crop_resize(const PixelGrid& image, const BBox& bbox, int out_size = kDefaultCropSize);

/// Face ids are `<painting_id>__<face_index>`.
std::string face_id_for(const std::string& painting_id, int face_index);

/// Painting id part of a face id; a face id without "__" is its own painting id.
std::string painting_of_face(const std::string& face_id);

std::vector<Detection> parse_detections(std::istream& lines);

FaceInstance align_face(const PixelGrid& image, const Detection& det,
                        int margin = kDefaultMargin, int out_size = kDefaultCropSize);

// Binary netpbm I/O: P5 (gray) and P6 (RGB), maxval 255.
PixelGrid read_netpbm(const std::filesystem::path& file);
void write_netpbm(const std::filesystem::path& file, const PixelGrid& grid);

}  // namespace atelier
