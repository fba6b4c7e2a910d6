#pragma once

#include <vector>

#include "immtrack/config.hpp"
#include "immtrack/imm.hpp"
#include "immtrack/mot_io.hpp"

namespace immtrack {

enum class TrackStatus { kTentative, kConfirmed, kLost, kRemoved };

struct Track {
    int id = 0;  // unique within a sequence, never reused
    TrackStatus status = TrackStatus::kTentative;
    ImmState imm;
    int hits = 0;    // consecutive matched frames
    int misses = 0;  // consecutive unmatched frames
    int age = 0;     // frames since birth
    std::vector<Vec3> mu_history;  // most recent last, bounded by the stability window
    BoundingBox last_box;
};

struct AblationFlags {
    bool single_motion_model = false;   // constant-velocity filter only, no bank
    bool single_stage = false;          // one association pass over all live tracks
    bool fixed_fusion_weights = false;  // alpha pinned to 0.5, lambda to 1
};

/// Candidate-pair instrumentation: rows x cols offered to each stage's
/// assignment, before gating.
struct StageCount {
    StageId stage;
    int tracks = 0;
    int dets = 0;
};

/// Staged per-frame association over motion-state buckets:
/// stable tracks claim high-confidence detections first under a strict
/// overlap gate, then maneuvering tracks, then lost tracks under a widened
/// motion gate, then (optionally) any leftover track against low-confidence
/// detections.
class Tracker {
public:
    explicit Tracker(const PipelineConfig& cfg, AblationFlags ablation = {});

    /// Runs one frame; frame indices must be strictly increasing.
    /// Returns one labeled box per confirmed track matched at this frame.
    std::vector<TrackedBox> process_frame(const std::vector<Detection>& detections, int frame);

    const std::vector<Track>& tracks() const { return tracks_; }
    const std::vector<std::vector<StageCount>>& stage_log() const { return stage_log_; }
    int ids_created() const { return next_id_ - 1; }
    int removed_count() const { return removed_; }

private:
    struct Candidate;  // per-track association view for one frame

    void associate_stage(StageId stage, std::vector<Candidate*>& rows,
                         const std::vector<Detection>& dets, std::vector<int>& det_pool,
                         std::vector<std::pair<Candidate*, int>>& matched);
    void spawn_track(const Detection& det);

    PipelineConfig cfg_;
    AblationFlags ablation_;
    Mat4 measurement_noise_;
    std::vector<Track> tracks_;
    std::vector<std::vector<StageCount>> stage_log_;
    int next_id_ = 1;
    int removed_ = 0;
    int last_frame_ = 0;
};

struct TrackRun {
    SequenceData results;
    int frames = 0;
    int live_tracks = 0;
    int removed_tracks = 0;
    int ids_created = 0;
};

/// Runs the tracker over a whole detection table (frames ascending); errors
/// are annotated with the frame index where they occurred.
TrackRun run_tracker(const SequenceData& detections, const PipelineConfig& cfg,
                     AblationFlags ablation = {});

SequenceData track_sequence(const SequenceData& detections, const PipelineConfig& cfg,
                            AblationFlags ablation = {});

/// Status/stability partition used by the staged association.
void classify_tracks(std::vector<Track*>& live, const ImmConfig& cfg,
                     std::vector<Track*>& stable, std::vector<Track*>& maneuvering,
                     std::vector<Track*>& lost);

}  // namespace immtrack
