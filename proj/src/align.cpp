#include "atelier/align.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "json.hpp"

#include "atelier/error.hpp"

namespace atelier {

namespace {

std::string describe(const BBox& b) {
    return "(" + std::to_string(b.x1) + "," + std::to_string(b.y1) + "," + std::to_string(b.x2) +
           "," + std::to_string(b.y2) + ")";
}

void require_valid(const BBox& b, int img_w, int img_h) {
    if (b.x1 < 0 || b.y1 < 0 || b.x1 >= b.x2 || b.y1 >= b.y2) {
        throw DomainError("degenerate bounding box " + describe(b));
    }
    if (b.x2 > img_w || b.y2 > img_h) {
        throw DomainError("bounding box " + describe(b) + " exceeds image " + std::to_string(img_w) +
                          "x" + std::to_string(img_h));
    }
}

// Skips whitespace and '#' comments in a netpbm header.
int read_header_int(std::istream& in, const std::filesystem::path& file) {
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) {
        throw ParseError("bad netpbm header in " + file.string());
    }
    return value;
}

}  // namespace

PixelGrid::PixelGrid(int width, int height, int channels, std::uint8_t fill)
    : PixelGrid(width, height, channels,
                std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                              std::max(height, 0) * std::max(channels, 0),
                                          fill)) {}

PixelGrid::PixelGrid(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
    if (width <= 0 || height <= 0) {
        throw DomainError("pixel grid dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw DomainError("pixel grid must have 1 or 3 channels");
    }
    if (samples_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw DomainError("pixel grid sample count does not match width*height*channels");
    }
}

BBox expand_and_clamp(const BBox& bbox, int margin, int img_w, int img_h) {
    if (margin < 0 || margin % 2 != 0) {
        throw DomainError("margin must be a non-negative even number of pixels");
    }
    require_valid(bbox, img_w, img_h);
    const int half = margin / 2;
    return {std::max(bbox.x1 - half, 0), std::max(bbox.y1 - half, 0),
            std::min(bbox.x2 + half, img_w), std::min(bbox.y2 + half, img_h)};
}

PixelGrid crop_resize(const PixelGrid& image, const BBox& bbox, int out_size) {
    if (out_size < 1) {
        throw DomainError("output size must be at least 1");
    }
    require_valid(bbox, image.width(), image.height());

    const int w = bbox.width();
    const int h = bbox.height();
    const int channels = image.channels();
    PixelGrid out(out_size, out_size, channels);

    // Corner-aligned: output corners sample the region's corner pixels exactly.
    auto source_coord = [out_size](int o, int extent) {
        if (out_size == 1) {
            return (extent - 1) / 2.0;
        }
        return static_cast<double>(o) * (extent - 1) / (out_size - 1);
    };

    for (int v = 0; v < out_size; ++v) {
        const double sy = source_coord(v, h);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - y0;
        for (int u = 0; u < out_size; ++u) {
            const double sx = source_coord(u, w);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - x0;
            for (int c = 0; c < channels; ++c) {
                const double top = (1.0 - fx) * image.at(bbox.x1 + x0, bbox.y1 + y0, c) +
                                   fx * image.at(bbox.x1 + x1, bbox.y1 + y0, c);
                const double bottom = (1.0 - fx) * image.at(bbox.x1 + x0, bbox.y1 + y1, c) +
                                      fx * image.at(bbox.x1 + x1, bbox.y1 + y1, c);
                const double value = (1.0 - fy) * top + fy * bottom;
                out.at(u, v, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
            }
        }
    }
    return out;
}

std::string face_id_for(const std::string& painting_id, int face_index) {
    return painting_id + "__" + std::to_string(face_index);
}

std::string painting_of_face(const std::string& face_id) {
    const auto pos = face_id.rfind("__");
    return pos == std::string::npos ? face_id : face_id.substr(0, pos);
}

std::vector<Detection> parse_detections(std::istream& lines) {
    std::vector<Detection> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto obj = nlohmann::json::parse(line);
            Detection d;
            d.painting_id = obj.at("painting_id").get<std::string>();
            d.face_index = obj.at("face_index").get<int>();
            d.bbox = {obj.at("x1").get<int>(), obj.at("y1").get<int>(), obj.at("x2").get<int>(),
                      obj.at("y2").get<int>()};
            out.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("detections line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

FaceInstance align_face(const PixelGrid& image, const Detection& det, int margin, int out_size) {
    const auto box = expand_and_clamp(det.bbox, margin, image.width(), image.height());
    return {face_id_for(det.painting_id, det.face_index), det.painting_id, box,
            crop_resize(image, box, out_size)};
}

PixelGrid read_netpbm(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw InputError("cannot open image " + file.string());
    }
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    int channels = 0;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw ParseError(file.string() + " is not a binary PGM/PPM image");
    }
    const int width = read_header_int(in, file);
    const int height = read_header_int(in, file);
    const int maxval = read_header_int(in, file);
    if (maxval != 255) {
        throw ParseError(file.string() + ": only 8-bit netpbm images are supported");
    }
    in.get();  // single whitespace before raster
    std::vector<std::uint8_t> samples(static_cast<std::size_t>(width) * height * channels);
    in.read(reinterpret_cast<char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
    if (in.gcount() != static_cast<std::streamsize>(samples.size())) {
        throw ParseError(file.string() + ": truncated raster");
    }
    return PixelGrid(width, height, channels, std::move(samples));
}

void write_netpbm(const std::filesystem::path& file, const PixelGrid& grid) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw InputError("cannot write image " + file.string());
    }
    out << (grid.channels() == 1 ? "P5" : "P6") << '\n'
        << grid.width() << ' ' << grid.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(grid.samples().data()),
              static_cast<std::streamsize>(grid.samples().size()));
}

}  // namespace atelier
