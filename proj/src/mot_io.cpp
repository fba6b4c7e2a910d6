#include "immtrack/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "immtrack/errors.hpp"

namespace immtrack {

std::size_t SequenceData::box_count() const {
    std::size_t n = 0;
    for (const auto& [frame, boxes] : frames) n += boxes.size();
    return n;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

// std::from_chars keeps parsing locale-independent (decimal point only).
double parse_field(std::string_view field, int line_no, int col_no) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " +
                         std::to_string(col_no) + ": not a number: '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

SequenceData parse_mot_file(std::istream& in, FileKind kind) {
    SequenceData seq;
    std::set<std::pair<int, int>> seen;  // (frame, id) for GT duplicate detection
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view rest = trim(line);
        if (rest.empty()) continue;

        double fields[10];
        int col = 0;
        while (col < 10) {
            const std::size_t comma = rest.find(',');
            const std::string_view field =
                comma == std::string_view::npos ? rest : rest.substr(0, comma);
            fields[col] = parse_field(field, line_no, col + 1);
            ++col;
            if (comma == std::string_view::npos) {
                rest = {};
                break;
            }
            rest = rest.substr(comma + 1);
        }
        if (col < 10 || !rest.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 10 fields");
        }

        TrackedBox row;
        row.frame = static_cast<int>(fields[0]);
        if (row.frame < 1) {
            throw ParseError("line " + std::to_string(line_no) + ": frame index must be >= 1");
        }
        row.box = BoundingBox{fields[2], fields[3], fields[4], fields[5]};
        if (kind == FileKind::kGroundTruth) {
            if (fields[6] == 0.0) continue;  // validity flag off
            row.id = static_cast<int>(fields[1]);
            row.confidence = 1.0;
            if (!seen.insert({row.frame, row.id}).second) {
                throw ParseError("line " + std::to_string(line_no) + ": duplicate (frame " +
                                 std::to_string(row.frame) + ", id " + std::to_string(row.id) +
                                 ")");
            }
        } else {
            row.id = -1;
            row.confidence = fields[6];
        }
        seq.frames[row.frame].push_back(row);
    }
    return seq;
}

SequenceData parse_mot_path(const std::string& path, FileKind kind) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    try {
        SequenceData seq = parse_mot_file(in, kind);
        seq.name = path;
        return seq;
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_results(const SequenceData& results, std::ostream& out) {
    char buf[160];
    for (const auto& [frame, boxes] : results.frames) {
        std::vector<TrackedBox> sorted = boxes;
        std::sort(sorted.begin(), sorted.end(),
                  [](const TrackedBox& a, const TrackedBox& b) { return a.id < b.id; });
        for (const TrackedBox& row : sorted) {
            const int n = std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%.2f,%.2f,1,-1,-1,-1\n",
                                        frame, row.id, row.box.x, row.box.y, row.box.w, row.box.h);
            out.write(buf, n);
        }
    }
    if (!out) throw std::runtime_error("result stream write failure");
}

void write_results_path(const SequenceData& results, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    write_results(results, out);
}

void write_detections(const SequenceData& detections, std::ostream& out) {
    char buf[160];
    for (const auto& [frame, boxes] : detections.frames) {
        for (const TrackedBox& row : boxes) {
            const int n =
                std::snprintf(buf, sizeof buf, "%d,-1,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n", frame,
                              row.box.x, row.box.y, row.box.w, row.box.h, row.confidence);
            out.write(buf, n);
        }
    }
    if (!out) throw std::runtime_error("detection stream write failure");
}

void write_detections_path(const SequenceData& detections, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    write_detections(detections, out);
}

}  // namespace immtrack
