#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "immtrack/geometry.hpp"

namespace immtrack {

/// One row of a MOT-format file: a detection (id -1) or an identity-labeled
/// ground-truth/result box.
struct TrackedBox {
    int frame = 0;
    int id = -1;
    BoundingBox box;
    double confidence = 1.0;
};

struct SequenceData {
    std::map<int, std::vector<TrackedBox>> frames;
    std::string name;

    bool empty() const { return frames.empty(); }
    int min_frame() const { return frames.empty() ? 0 : frames.begin()->first; }
    int max_frame() const { return frames.empty() ? 0 : frames.rbegin()->first; }
    std::size_t box_count() const;
};

enum class FileKind { kDetections, kGroundTruth };

/// Parses 10-column MOT CSV "frame,id,left,top,width,height,conf,x,y,z".
/// kDetections ignores the id column; kGroundTruth keeps ids, drops rows with
/// conf 0 (the conventional validity flag), and rejects duplicate (frame, id).
/// Blank lines and trailing whitespace tolerated; CRLF accepted.
SequenceData parse_mot_file(std::istream& in, FileKind kind);

/// Convenience file wrapper; error messages carry the path.
SequenceData parse_mot_path(const std::string& path, FileKind kind);

/// Writes "frame,id,x,y,w,h,1,-1,-1,-1" rows, coordinates at 2 decimals,
/// sorted by frame then id. parse(write(x)) round-trips structurally and
/// write(parse(write(x))) is byte-identical.
void write_results(const SequenceData& results, std::ostream& out);

void write_results_path(const SequenceData& results, const std::string& path);

/// Writes "frame,-1,x,y,w,h,conf,-1,-1,-1" rows for anonymous detections,
/// confidence at 2 decimals.
void write_detections(const SequenceData& detections, std::ostream& out);

void write_detections_path(const SequenceData& detections, const std::string& path);

}  // namespace immtrack
