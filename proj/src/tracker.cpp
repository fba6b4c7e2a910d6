#include "immtrack/tracker.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "immtrack/association.hpp"
#include "immtrack/errors.hpp"
#include "immtrack/ukf.hpp"

namespace immtrack {

namespace {

Gaussian initial_gaussian(const BoundingBox& box) {
    Gaussian g;
    g.mean = StateVec::Zero();
    g.mean[kIdxCx] = box.cx();
    g.mean[kIdxCy] = box.cy();
    g.mean[kIdxW] = box.w;
    g.mean[kIdxH] = box.h;

    // A first observation localizes the box but carries no motion evidence:
    // wide position/velocity priors scaled by the box itself.
    const double w = std::max(box.w, 1.0), h = std::max(box.h, 1.0);
    StateVec d;
    d[kIdxCx] = (2.0 * w) * (2.0 * w);
    d[kIdxCy] = (2.0 * h) * (2.0 * h);
    d[kIdxVx] = w * w;
    d[kIdxVy] = h * h;
    d[kIdxAx] = (w / 2.0) * (w / 2.0);
    d[kIdxAy] = (h / 2.0) * (h / 2.0);
    d[kIdxOmega] = 0.04;  // sigma 0.2 rad/frame covers plausible turn rates
    d[kIdxW] = (w / 2.0) * (w / 2.0);
    d[kIdxH] = (h / 2.0) * (h / 2.0);
    g.cov = d.asDiagonal();
    return g;
}

void push_mu(Track& t, int window) {
    t.mu_history.push_back(t.imm.mu);
    if (static_cast<int>(t.mu_history.size()) > window) {
        t.mu_history.erase(t.mu_history.begin());
    }
}

}  // namespace

void classify_tracks(std::vector<Track*>& live, const ImmConfig& cfg,
                     std::vector<Track*>& stable, std::vector<Track*>& maneuvering,
                     std::vector<Track*>& lost) {
    for (Track* t : live) {
        if (t->status == TrackStatus::kLost) {
            lost.push_back(t);  // status dominates the motion-state split
        } else if (maneuver_score(t->mu_history, cfg).is_stable) {
            stable.push_back(t);
        } else {
            maneuvering.push_back(t);
        }
    }
}

struct Tracker::Candidate {
    Track* track = nullptr;
    ImmState preview;  // coasted one frame ahead, used for gating and costs
    Vec4 z_pred = Vec4::Zero();
    Mat4 s = Mat4::Identity();
    BoundingBox pred_box;
    bool stable = false;
    int matched_det = -1;
};

Tracker::Tracker(const PipelineConfig& cfg, AblationFlags ablation)
    : cfg_(cfg), ablation_(ablation) {
    if (ablation_.single_motion_model) {
        // Degenerate bank: all probability pinned on the constant-velocity
        // model, no interaction, no adaptation.
        cfg_.imm.mu_init = Vec3(1.0, 0.0, 0.0);
        cfg_.imm.tpm = Mat3::Identity();
        cfg_.imm.adaptive_tpm = false;
    }
    measurement_noise_ = cfg_.measurement_noise();
}

void Tracker::associate_stage(StageId stage, std::vector<Candidate*>& rows,
                              const std::vector<Detection>& dets, std::vector<int>& det_pool,
                              std::vector<std::pair<Candidate*, int>>& matched) {
    stage_log_.back().push_back(
        {stage, static_cast<int>(rows.size()), static_cast<int>(det_pool.size())});
    if (rows.empty() || det_pool.empty()) return;

    Eigen::MatrixXd costs(rows.size(), det_pool.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Candidate& c = *rows[r];
        for (std::size_t k = 0; k < det_pool.size(); ++k) {
            const Detection& d = dets[det_pool[k]];
            const double iou_raw = iou(c.pred_box, d.box);
            const MotionCost mc = motion_cost(c.preview.combined, d, c.s, cfg_.auf);
            if (mc.degenerate || !gate(mc.d2, iou_raw, stage, cfg_.auf)) {
                costs(r, k) = kGatedCost;
            } else if (ablation_.fixed_fusion_weights) {
                costs(r, k) = 0.5 * (1.0 - iou_raw) + 0.5 * mc.cost;
            } else {
                costs(r, k) = fuse(iou_raw, mc.cost, c.preview.uncertainty, c.stable, cfg_.auf);
            }
        }
    }

    const Assignment a = solve_assignment(costs, kGatedCost);
    std::vector<int> taken;
    for (const auto& [r, k] : a.matches) {
        rows[r]->matched_det = det_pool[k];
        matched.emplace_back(rows[r], det_pool[k]);
        taken.push_back(det_pool[k]);
    }
    std::erase_if(det_pool, [&taken](int idx) {
        return std::find(taken.begin(), taken.end(), idx) != taken.end();
    });
    std::erase_if(rows, [](const Candidate* c) { return c->matched_det >= 0; });
}

void Tracker::spawn_track(const Detection& det) {
    Track t;
    t.id = next_id_++;
    t.status = TrackStatus::kTentative;
    t.imm = make_imm_state(initial_gaussian(det.box), cfg_.imm);
    t.hits = 1;
    t.misses = 0;
    t.age = 1;
    t.last_box = det.box;
    push_mu(t, cfg_.imm.stability_window);
    tracks_.push_back(std::move(t));
}

std::vector<TrackedBox> Tracker::process_frame(const std::vector<Detection>& detections,
                                               int frame) {
    if (frame <= last_frame_) {
        throw std::invalid_argument("frame indices must strictly increase: " +
                                    std::to_string(frame) + " after " +
                                    std::to_string(last_frame_));
    }
    last_frame_ = frame;
    stage_log_.emplace_back();

    // Coast every live track one frame ahead; the coasted bank is both the
    // association view and the fallback state for unmatched tracks.
    std::vector<Candidate> cands;
    cands.reserve(tracks_.size());
    for (Track& t : tracks_) {
        Candidate c;
        c.track = &t;
        c.preview = step(t.imm, std::nullopt, cfg_.dt, cfg_.imm, cfg_.ut, cfg_.noise,
                         measurement_noise_);
        predict_measurement(c.preview.combined, measurement_noise_, cfg_.ut, &c.z_pred, &c.s);
        c.pred_box = measurement_to_box(measurement_fn(c.preview.combined.mean));
        c.stable = maneuver_score(t.mu_history, cfg_.imm).is_stable;
        cands.push_back(std::move(c));
    }

    std::vector<int> high_pool, low_pool;
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
        const double conf = detections[i].confidence;
        if (conf >= cfg_.tracker.det_conf_high) {
            high_pool.push_back(i);
        } else if (conf >= cfg_.tracker.det_conf_min) {
            low_pool.push_back(i);
        }
    }

    std::vector<std::pair<Candidate*, int>> matched;
    if (ablation_.single_stage) {
        std::vector<Candidate*> all;
        for (Candidate& c : cands) all.push_back(&c);
        associate_stage(StageId::kManeuver, all, detections, high_pool, matched);
        if (cfg_.tracker.low_conf_stage) {
            associate_stage(StageId::kLowConf, all, detections, low_pool, matched);
        }
    } else {
        std::vector<Track*> live;
        std::map<const Track*, Candidate*> by_track;
        for (Candidate& c : cands) {
            live.push_back(c.track);
            by_track[c.track] = &c;
        }
        std::vector<Track*> stable, maneuvering, lost;
        classify_tracks(live, cfg_.imm, stable, maneuvering, lost);
        const auto to_rows = [&by_track](const std::vector<Track*>& bucket) {
            std::vector<Candidate*> rows;
            for (Track* t : bucket) rows.push_back(by_track.at(t));
            return rows;
        };
        std::vector<Candidate*> stable_rows = to_rows(stable);
        std::vector<Candidate*> maneuver_rows = to_rows(maneuvering);
        std::vector<Candidate*> lost_rows = to_rows(lost);

        associate_stage(StageId::kStable, stable_rows, detections, high_pool, matched);
        associate_stage(StageId::kManeuver, maneuver_rows, detections, high_pool, matched);
        associate_stage(StageId::kLost, lost_rows, detections, high_pool, matched);
        if (cfg_.tracker.low_conf_stage) {
            std::vector<Candidate*> leftovers;
            for (Candidate& c : cands) {
                if (c.matched_det < 0) leftovers.push_back(&c);
            }
            associate_stage(StageId::kLowConf, leftovers, detections, low_pool, matched);
        }
    }

    std::vector<TrackedBox> outputs;
    for (Candidate& c : cands) {
        Track& t = *c.track;
        ++t.age;
        if (c.matched_det >= 0) {
            const Detection& d = detections[c.matched_det];
            t.imm = step(t.imm, box_to_measurement(d.box), cfg_.dt, cfg_.imm, cfg_.ut, cfg_.noise,
                         measurement_noise_);
            ++t.hits;
            t.misses = 0;
            if (t.status == TrackStatus::kTentative && t.hits >= cfg_.tracker.n_init) {
                t.status = TrackStatus::kConfirmed;
            } else if (t.status == TrackStatus::kLost) {
                t.status = TrackStatus::kConfirmed;
            }
            t.last_box = measurement_to_box(measurement_fn(t.imm.combined.mean));
            push_mu(t, cfg_.imm.stability_window);
            if (t.status == TrackStatus::kConfirmed) {
                outputs.push_back(TrackedBox{frame, t.id, t.last_box, 1.0});
            }
        } else {
            t.imm = c.preview;
            t.hits = 0;
            ++t.misses;
            t.last_box = measurement_to_box(measurement_fn(t.imm.combined.mean));
            push_mu(t, cfg_.imm.stability_window);
            if (t.status == TrackStatus::kTentative) {
                t.status = TrackStatus::kRemoved;
            } else if (t.status == TrackStatus::kConfirmed) {
                t.status = TrackStatus::kLost;
            } else if (t.status == TrackStatus::kLost &&
                       t.misses > cfg_.tracker.max_age_lost) {
                t.status = TrackStatus::kRemoved;
            }
        }
    }

    for (int idx : high_pool) spawn_track(detections[idx]);

    const auto dead = [](const Track& t) { return t.status == TrackStatus::kRemoved; };
    removed_ += static_cast<int>(std::count_if(tracks_.begin(), tracks_.end(), dead));
    std::erase_if(tracks_, dead);

    return outputs;
}

TrackRun run_tracker(const SequenceData& detections, const PipelineConfig& cfg,
                     AblationFlags ablation) {
    Tracker tracker(cfg, ablation);
    TrackRun run;
    if (detections.empty()) return run;

    run.frames = detections.max_frame() - detections.min_frame() + 1;
    for (int frame = detections.min_frame(); frame <= detections.max_frame(); ++frame) {
        std::vector<Detection> dets;
        if (const auto it = detections.frames.find(frame); it != detections.frames.end()) {
            for (const TrackedBox& b : it->second) {
                dets.push_back(Detection{frame, b.box, b.confidence});
            }
        }
        try {
            std::vector<TrackedBox> rows = tracker.process_frame(dets, frame);
            if (!rows.empty()) run.results.frames[frame] = std::move(rows);
        } catch (const DegeneracyError& e) {
            throw DegeneracyError("frame " + std::to_string(frame) + ": " + e.what());
        }
    }
    run.live_tracks = static_cast<int>(tracker.tracks().size());
    run.removed_tracks = tracker.removed_count();
    run.ids_created = tracker.ids_created();
    return run;
}

SequenceData track_sequence(const SequenceData& detections, const PipelineConfig& cfg,
                            AblationFlags ablation) {
    return run_tracker(detections, cfg, ablation).results;
}

}  // namespace immtrack
