#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atelier {

inline constexpr int kMinYear = 1000;
inline constexpr int kMaxYear = 2100;
inline constexpr int kYearBinWidth = 50;

struct PaintingRecord {
    std::string painting_id;
    std::string artist;  // lowercased
    std::string title;
    std::string style;   // lowercased
    std::optional<int> year;
    std::string source_path;

    bool operator==(const PaintingRecord&) const = default;
};

// Half-open 50-year interval [start, start + 50).
struct YearBin {
    int start = 0;
    std::string label;

    int end() const { return start + kYearBinWidth; }
    bool contains(int year) const { return year >= start && year < end(); }
};

struct ParsedFilename {
    std::string artist;
    std::string title;
    std::string style;
    std::optional<int> year;

    bool operator==(const ParsedFilename&) const = default;
};

/// Parses a line-delimited manifest: one JSON object per non-empty line with keys
/// id, artist, title, style, path and an optional integer year.
/// Throws ParseError naming the 1-based line number, or the duplicated id.
std::vector<PaintingRecord> parse_manifest(std::istream& lines);

std::vector<PaintingRecord> load_manifest(const std::filesystem::path& file);

/// One manifest line for a record; keys are emitted in a fixed order.
std::string manifest_line(const PaintingRecord& record);

void write_manifest(std::ostream& out, const std::vector<PaintingRecord>& records);

/// Parses `<style>/<artist>_<title>[_<year>].<ext>`. Leading directories before the
/// style directory are ignored. A trailing numeric field becomes the year only when it
/// is 3-4 digits and lies in [1000, 2100]; otherwise it stays part of the title.
ParsedFilename parse_filename(std::string_view path);

/// Inverse of parse_filename for well-formed inputs.
std::string render_filename(const ParsedFilename& fields, std::string_view extension);

/// Throws DomainError for years outside [1000, 2100].
YearBin year_bin(int year);

/// Builds records from every image file under `root`, sorted by relative path.
/// painting_id is the relative path without extension, with '/' replaced by '.'.
std::vector<PaintingRecord> scan_directory(const std::filesystem::path& root);

std::string to_lower(std::string_view s);

/// Lookup from painting id to record. Throws ParseError on duplicate ids.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<PaintingRecord> records);

    const std::vector<PaintingRecord>& records() const { return records_; }
    const PaintingRecord* find(std::string_view painting_id) const;
    std::size_t size() const { return records_.size(); }

private:
    std::vector<PaintingRecord> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace atelier
