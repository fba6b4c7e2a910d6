#pragma once

#include <iosfwd>
#include <vector>

#include "immtrack/config.hpp"
#include "immtrack/mot_io.hpp"
#include "immtrack/motion.hpp"

namespace immtrack {

struct RegimeEntry {
    int frame = 0;
    int target = 0;  // matches the ground-truth id
    ModelId regime = ModelId::kCv;
};

struct SimOutput {
    SequenceData gt;   // identity-labeled truth, one box per target per frame
    SequenceData det;  // degraded detections, ids stripped
    std::vector<RegimeEntry> regimes;
};

/// Generates regime-switching trajectories inside a closed arena: each target
/// follows one motion model at a time, switching by a Markov dwell process,
/// and reflects elastically off the walls. Fully determined by cfg.seed.
/// Throws when initial non-overlapping placement fails 1000 times.
SimOutput generate_sequence(const SimConfig& cfg);

/// Applies occlusion merging, dropout, and box jitter to identity-labeled
/// truth, producing anonymous detections with sampled confidences.
/// Deterministic given cfg.seed (separate stream from generation).
SequenceData degrade_detections(const SequenceData& gt, const SimConfig& cfg);

/// CSV rows "frame,target,regime" with regime names CV/CA/CT.
void write_regime_log(const std::vector<RegimeEntry>& log, std::ostream& out);

}  // namespace immtrack
