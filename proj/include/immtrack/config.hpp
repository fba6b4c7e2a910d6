#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "immtrack/association.hpp"
#include "immtrack/imm.hpp"

namespace immtrack {

/// Track lifecycle knobs.
struct TrackerConfig {
    int n_init = 3;              // consecutive hits before a track is confirmed
    int max_age_lost = 30;       // frames a lost track survives unmatched
    double det_conf_min = 0.1;   // below this, detections are discarded
    double det_conf_high = 0.5;  // at or above this, detections are first-class
    bool low_conf_stage = true;  // second-chance pass over low-confidence boxes
};

/// Everything the tracking pipeline consumes, with shipped defaults.
struct PipelineConfig {
    UtParams ut;
    NoiseConfig noise;
    ImmConfig imm;
    AufConfig auf;
    TrackerConfig tracker;
    double r_pos = 1.0;  // measurement variance, center coordinates (px^2)
    double r_wh = 4.0;   // measurement variance, box extents (px^2)
    double dt = 1.0;     // filter step, in frames

    Mat4 measurement_noise() const {
        Mat4 r = Mat4::Zero();
        r(0, 0) = r(1, 1) = r_pos;
        r(2, 2) = r(3, 3) = r_wh;
        return r;
    }
};

/// Synthetic sequence generator parameters.
struct SimConfig {
    int n_targets = 10;
    int n_frames = 500;
    double arena_width = 1280.0;
    double arena_height = 720.0;
    double regime_dwell = 40.0;  // mean frames between motion-regime switches
    std::array<double, 3> regime_weights = {0.4, 0.3, 0.3};  // CV, CA, CT
    double speed_min = 1.5, speed_max = 3.5;                 // px/frame
    double turn_rate_min = 0.05, turn_rate_max = 0.2;        // rad/frame
    double box_size_min = 20.0, box_size_max = 40.0;         // px
    std::uint64_t seed = 1;
    double process_sigma = 0.02;  // per-frame velocity jitter in the truth (px/frame)
    double jitter_sigma = 0.05;   // detection noise relative to box size
    double dropout_prob = 0.0;
    bool occlusion_merge = false;  // overlapping truth boxes collapse to one detection
    double conf_mean = 0.9, conf_sigma = 0.05;
};

/// Parses flat "key = value" text ('#' comments). Unknown keys and constraint
/// violations are hard errors naming the offending key(s); absent keys keep
/// the defaults above.
PipelineConfig load_pipeline_config(std::istream& in);
SimConfig load_sim_config(std::istream& in);

/// File wrappers; an empty path returns all defaults.
PipelineConfig load_pipeline_config_path(const std::string& path);
SimConfig load_sim_config_path(const std::string& path);

}  // namespace immtrack
