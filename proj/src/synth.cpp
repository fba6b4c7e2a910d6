#include "immtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "immtrack/rng.hpp"

namespace immtrack {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAccelMin = 0.05, kAccelMax = 0.25;  // px/frame^2 while accelerating
constexpr double kMergeIou = 0.4;
// Distinct stream for degradation so truth and noise draws never interleave.
constexpr std::uint64_t kDegradeStreamSalt = 0x6a09e667f3bcc908ULL;

ModelId sample_regime(Rng& rng, const std::array<double, 3>& w) {
    const double u = rng.uniform() * (w[0] + w[1] + w[2]);
    if (u < w[0]) return ModelId::kCv;
    if (u < w[0] + w[1]) return ModelId::kCa;
    return ModelId::kCt;
}

// Regime entry: zero the maneuver inputs, then arm the new regime's.
void enter_regime(StateVec& s, ModelId regime, Rng& rng, const SimConfig& cfg) {
    s[kIdxAx] = s[kIdxAy] = 0.0;
    s[kIdxOmega] = 0.0;
    if (regime == ModelId::kCa) {
        const double mag = rng.uniform(kAccelMin, kAccelMax);
        const double heading = rng.uniform(0.0, 2.0 * kPi);
        s[kIdxAx] = mag * std::cos(heading);
        s[kIdxAy] = mag * std::sin(heading);
    } else if (regime == ModelId::kCt) {
        double omega = rng.uniform(cfg.turn_rate_min, cfg.turn_rate_max);
        if (rng.bernoulli(0.5)) omega = -omega;
        s[kIdxOmega] = omega;
    }
}

void clamp_speed(StateVec& s, const SimConfig& cfg) {
    const double lo = cfg.speed_min, hi = cfg.speed_max;
    const double sp = std::hypot(s[kIdxVx], s[kIdxVy]);
    double scale = 1.0;
    if (sp > hi) {
        scale = hi / sp;
    } else if (sp < lo && sp > 1e-9) {
        scale = lo / sp;
    } else if (sp <= 1e-9 && lo > 0.0) {
        s[kIdxVx] = lo;  // stalled: restart along +x
        s[kIdxVy] = 0.0;
        s[kIdxAx] = s[kIdxAy] = 0.0;
        return;
    }
    if (scale != 1.0) {
        s[kIdxVx] *= scale;
        s[kIdxVy] *= scale;
        s[kIdxAx] = s[kIdxAy] = 0.0;  // the accelerating regime drove it out of range
    }
}

// Elastic reflection keeping the whole box inside the arena. Mirrors flip the
// tangential derivatives' sign conventions, so omega flips too.
void reflect_walls(StateVec& s, const SimConfig& cfg) {
    const double hw = s[kIdxW] / 2.0, hh = s[kIdxH] / 2.0;
    for (int pass = 0; pass < 4; ++pass) {
        bool bounced = false;
        if (s[kIdxCx] < hw) {
            s[kIdxCx] = 2.0 * hw - s[kIdxCx];
            s[kIdxVx] = -s[kIdxVx];
            s[kIdxAx] = -s[kIdxAx];
            s[kIdxOmega] = -s[kIdxOmega];
            bounced = true;
        } else if (s[kIdxCx] > cfg.arena_width - hw) {
            s[kIdxCx] = 2.0 * (cfg.arena_width - hw) - s[kIdxCx];
            s[kIdxVx] = -s[kIdxVx];
            s[kIdxAx] = -s[kIdxAx];
            s[kIdxOmega] = -s[kIdxOmega];
            bounced = true;
        }
        if (s[kIdxCy] < hh) {
            s[kIdxCy] = 2.0 * hh - s[kIdxCy];
            s[kIdxVy] = -s[kIdxVy];
            s[kIdxAy] = -s[kIdxAy];
            s[kIdxOmega] = -s[kIdxOmega];
            bounced = true;
        } else if (s[kIdxCy] > cfg.arena_height - hh) {
            s[kIdxCy] = 2.0 * (cfg.arena_height - hh) - s[kIdxCy];
            s[kIdxVy] = -s[kIdxVy];
            s[kIdxAy] = -s[kIdxAy];
            s[kIdxOmega] = -s[kIdxOmega];
            bounced = true;
        }
        if (!bounced) return;
    }
}

BoundingBox state_box(const StateVec& s) {
    return BoundingBox{s[kIdxCx] - s[kIdxW] / 2.0, s[kIdxCy] - s[kIdxH] / 2.0, s[kIdxW],
                       s[kIdxH]};
}

}  // namespace

SimOutput generate_sequence(const SimConfig& cfg) {
    if (cfg.n_targets > 0 &&
        (cfg.box_size_max >= cfg.arena_width || cfg.box_size_max >= cfg.arena_height)) {
        throw std::runtime_error("synth: box_size_max must be smaller than the arena");
    }

    Rng rng(cfg.seed);
    SimOutput out;

    struct TargetState {
        StateVec s;
        ModelId regime;
    };
    std::vector<TargetState> targets;
    std::vector<BoundingBox> placed;
    for (int t = 0; t < cfg.n_targets; ++t) {
        BoundingBox box;
        int attempts = 0;
        for (;;) {
            if (++attempts > 1000) {
                throw std::runtime_error(
                    "synth: could not place " + std::to_string(cfg.n_targets) +
                    " non-overlapping targets after 1000 attempts (n_targets vs arena size)");
            }
            const double w = rng.uniform(cfg.box_size_min, cfg.box_size_max);
            const double h = rng.uniform(cfg.box_size_min, cfg.box_size_max);
            const double cx = rng.uniform(w / 2.0, cfg.arena_width - w / 2.0);
            const double cy = rng.uniform(h / 2.0, cfg.arena_height - h / 2.0);
            box = BoundingBox{cx - w / 2.0, cy - h / 2.0, w, h};
            bool clear = true;
            for (const BoundingBox& other : placed) {
                if (iou(box, other) > 0.0) {
                    clear = false;
                    break;
                }
            }
            if (clear) break;
        }
        placed.push_back(box);

        TargetState ts;
        ts.s = StateVec::Zero();
        ts.s[kIdxCx] = box.cx();
        ts.s[kIdxCy] = box.cy();
        ts.s[kIdxW] = box.w;
        ts.s[kIdxH] = box.h;
        const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
        const double heading = rng.uniform(0.0, 2.0 * kPi);
        ts.s[kIdxVx] = speed * std::cos(heading);
        ts.s[kIdxVy] = speed * std::sin(heading);
        ts.regime = sample_regime(rng, cfg.regime_weights);
        enter_regime(ts.s, ts.regime, rng, cfg);
        targets.push_back(ts);
    }

    for (int frame = 1; frame <= cfg.n_frames; ++frame) {
        for (int t = 0; t < cfg.n_targets; ++t) {
            TargetState& ts = targets[t];
            out.gt.frames[frame].push_back(TrackedBox{frame, t + 1, state_box(ts.s), 1.0});
            out.regimes.push_back(RegimeEntry{frame, t + 1, ts.regime});

            if (rng.bernoulli(1.0 / cfg.regime_dwell)) {
                ts.regime = sample_regime(rng, cfg.regime_weights);
                enter_regime(ts.s, ts.regime, rng, cfg);
            }
            ts.s = transition(ts.regime, ts.s, 1.0);
            ts.s[kIdxVx] += cfg.process_sigma * rng.gaussian();
            ts.s[kIdxVy] += cfg.process_sigma * rng.gaussian();
            clamp_speed(ts.s, cfg);
            reflect_walls(ts.s, cfg);
        }
    }

    out.det = degrade_detections(out.gt, cfg);
    return out;
}

SequenceData degrade_detections(const SequenceData& gt, const SimConfig& cfg) {
    Rng rng(cfg.seed ^ kDegradeStreamSalt);
    SequenceData det;
    for (const auto& [frame, boxes] : gt.frames) {
        const int n = static_cast<int>(boxes.size());
        std::vector<char> merged(n, 0);
        if (cfg.occlusion_merge) {
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    if (!merged[i] && !merged[j] && iou(boxes[i].box, boxes[j].box) > kMergeIou) {
                        merged[j] = 1;  // the pair yields one detection; keep the first
                    }
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            // Fixed draw order per truth box keeps the stream stable across
            // outcome branches.
            const bool dropped = rng.bernoulli(cfg.dropout_prob);
            const double jx = cfg.jitter_sigma * boxes[i].box.w * rng.gaussian();
            const double jy = cfg.jitter_sigma * boxes[i].box.h * rng.gaussian();
            const double jw = cfg.jitter_sigma * boxes[i].box.w * rng.gaussian();
            const double jh = cfg.jitter_sigma * boxes[i].box.h * rng.gaussian();
            const double conf =
                std::clamp(cfg.conf_mean + cfg.conf_sigma * rng.gaussian(), 0.0, 1.0);
            if (merged[i] || dropped) continue;
            BoundingBox b{boxes[i].box.x + jx, boxes[i].box.y + jy, boxes[i].box.w + jw,
                          boxes[i].box.h + jh};
            det.frames[frame].push_back(TrackedBox{frame, -1, clamp_extent(b), conf});
        }
    }
    return det;
}

void write_regime_log(const std::vector<RegimeEntry>& log, std::ostream& out) {
    for (const RegimeEntry& e : log) {
        out << e.frame << ',' << e.target << ',' << model_name(e.regime) << '\n';
    }
}

}  // namespace immtrack
