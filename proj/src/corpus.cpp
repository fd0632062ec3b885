#include "atelier/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>

#include "json.hpp"

#include "atelier/error.hpp"

namespace atelier {

namespace {

bool has_separator(std::string_view s) {
    return s.find('/') != std::string_view::npos || s.find('\\') != std::string_view::npos;
}

std::string line_error(std::size_t line_no, const std::string& what) {
    return "manifest line " + std::to_string(line_no) + ": " + what;
}

std::string required_string(const nlohmann::json& obj, const char* key, std::size_t line_no,
                            bool allow_empty) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(line_error(line_no, std::string("missing or non-string \"") + key + "\""));
    }
    auto value = it->get<std::string>();
    if (!allow_empty && value.empty()) {
        throw ParseError(line_error(line_no, std::string("empty \"") + key + "\""));
    }
    return value;
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::optional<int> parse_year_field(std::string_view field) {
    if (field.size() < 3 || field.size() > 4) {
        return std::nullopt;
    }
    if (!std::all_of(field.begin(), field.end(), [](unsigned char c) { return std::isdigit(c); })) {
        return std::nullopt;
    }
    int year = 0;
    std::from_chars(field.data(), field.data() + field.size(), year);
    if (year < kMinYear || year > kMaxYear) {
        return std::nullopt;
    }
    return year;
}

const std::set<std::string> kImageExtensions = {".jpg", ".jpeg", ".png", ".pgm", ".ppm",
                                                ".bmp", ".tif", ".tiff"};

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<PaintingRecord> parse_manifest(std::istream& lines) {
    std::vector<PaintingRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_error(line_no, std::string("invalid JSON: ") + e.what()));
        }
        if (!obj.is_object()) {
            throw ParseError(line_error(line_no, "expected an object"));
        }
        PaintingRecord rec;
        rec.painting_id = required_string(obj, "id", line_no, false);
        rec.artist = to_lower(required_string(obj, "artist", line_no, false));
        rec.title = required_string(obj, "title", line_no, true);
        rec.style = to_lower(required_string(obj, "style", line_no, false));
        rec.source_path = required_string(obj, "path", line_no, true);
        if (auto it = obj.find("year"); it != obj.end() && !it->is_null()) {
            if (!it->is_number_integer()) {
                throw ParseError(line_error(line_no, "\"year\" must be an integer"));
            }
            const auto year = it->get<long long>();
            if (year < kMinYear || year > kMaxYear) {
                throw ParseError(line_error(line_no, "year " + std::to_string(year) + " outside [1000, 2100]"));
            }
            rec.year = static_cast<int>(year);
        }
        if (has_separator(rec.artist) || has_separator(rec.style)) {
            throw ParseError(line_error(line_no, "artist and style must not contain path separators"));
        }
        if (!seen.insert(rec.painting_id).second) {
            throw ParseError(line_error(line_no, "duplicate painting id \"" + rec.painting_id + "\""));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<PaintingRecord> load_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw InputError("cannot open manifest " + file.string());
    }
    return parse_manifest(in);
}

std::string manifest_line(const PaintingRecord& record) {
    nlohmann::ordered_json obj;
    obj["id"] = record.painting_id;
    obj["artist"] = record.artist;
    obj["title"] = record.title;
    obj["style"] = record.style;
    if (record.year) {
        obj["year"] = *record.year;
    }
    obj["path"] = record.source_path;
    return obj.dump();
}

void write_manifest(std::ostream& out, const std::vector<PaintingRecord>& records) {
    for (const auto& r : records) {
        out << manifest_line(r) << '\n';
    }
}

ParsedFilename parse_filename(std::string_view path) {
    const auto slash = path.find_last_of("/\\");
    if (slash == std::string_view::npos || slash == 0) {
        throw ParseError("filename \"" + std::string(path) + "\" has no style directory");
    }
    const auto dir = path.substr(0, slash);
    const auto dir_start = dir.find_last_of("/\\");
    const auto style = dir_start == std::string_view::npos ? dir : dir.substr(dir_start + 1);
    if (style.empty()) {
        throw ParseError("filename \"" + std::string(path) + "\" has no style directory");
    }

    auto name = path.substr(slash + 1);
    if (const auto dot = name.find_last_of('.'); dot != std::string_view::npos && dot > 0) {
        name = name.substr(0, dot);
    }

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = name.find('_', start);
        fields.push_back(name.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    if (fields.size() < 2 || fields.front().empty()) {
        throw ParseError("filename \"" + std::string(path) + "\" needs <artist>_<title>");
    }

    ParsedFilename out;
    out.style = to_lower(style);
    out.artist = to_lower(fields.front());
    std::size_t title_end = fields.size();
    if (fields.size() >= 3) {
        if (auto year = parse_year_field(fields.back())) {
            out.year = year;
            --title_end;
        }
    }
    std::string title;
    for (std::size_t i = 1; i < title_end; ++i) {
        if (i > 1) {
            title += '_';
        }
        title += fields[i];
    }
    out.title = to_lower(title);
    return out;
}

std::string render_filename(const ParsedFilename& fields, std::string_view extension) {
    std::string out = fields.style + "/" + fields.artist + "_" + fields.title;
    if (fields.year) {
        out += "_" + std::to_string(*fields.year);
    }
    if (!extension.empty()) {
        if (extension.front() != '.') {
            out += '.';
        }
        out += extension;
    }
    return out;
}

YearBin year_bin(int year) {
    if (year < kMinYear || year > kMaxYear) {
        throw DomainError("year " + std::to_string(year) + " outside [1000, 2100]");
    }
    YearBin bin;
    bin.start = (year / kYearBinWidth) * kYearBinWidth;
    bin.label = std::to_string(bin.start) + "-" + std::to_string(bin.start + kYearBinWidth);
    return bin;
}

std::vector<PaintingRecord> scan_directory(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) {
        throw InputError("cannot scan " + root.string() + ": not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && kImageExtensions.count(to_lower(entry.path().extension().string()))) {
            files.push_back(fs::relative(entry.path(), root));
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<PaintingRecord> records;
    std::set<std::string> seen;
    for (const auto& rel : files) {
        const auto generic = rel.generic_string();
        const auto fields = parse_filename(generic);
        auto id = (rel.parent_path() / rel.stem()).generic_string();
        std::replace(id.begin(), id.end(), '/', '.');
        if (!seen.insert(id).second) {
            throw ParseError("duplicate painting id \"" + id + "\" while scanning " + root.string());
        }
        records.push_back({id, fields.artist, fields.title, fields.style, fields.year, generic});
    }
    return records;
}

Corpus::Corpus(std::vector<PaintingRecord> records) : records_(std::move(records)) {
    by_id_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (!by_id_.emplace(records_[i].painting_id, i).second) {
            throw ParseError("duplicate painting id \"" + records_[i].painting_id + "\"");
        }
    }
}

const PaintingRecord* Corpus::find(std::string_view painting_id) const {
    auto it = by_id_.find(std::string(painting_id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

}  // namespace atelier
