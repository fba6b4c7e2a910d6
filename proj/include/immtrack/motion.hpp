#pragma once

#include <Eigen/Dense>

#include "immtrack/geometry.hpp"

namespace immtrack {

inline constexpr int kStateDim = 9;
inline constexpr int kMeasDim = 4;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Component layout of the common state vector shared by all motion models.
enum StateIndex : int {
    kIdxCx = 0,
    kIdxCy = 1,
    kIdxVx = 2,
    kIdxVy = 3,
    kIdxAx = 4,
    kIdxAy = 5,
    kIdxOmega = 6,  // turn rate, rad/frame
    kIdxW = 7,
    kIdxH = 8,
};

enum class ModelId : int { kCv = 0, kCa = 1, kCt = 2 };
inline constexpr int kNumModels = 3;

const char* model_name(ModelId m);

/// Process-noise scales, per frame. Velocity scale also drives the
/// coordinated-turn speed noise.
struct NoiseConfig {
    double sigma_cv_vel = 1.0;     // px/frame
    double sigma_ca_acc = 0.5;     // px/frame^2
    double sigma_ct_omega = 0.05;  // rad/frame
    double sigma_wh = 0.5;         // px
};

/// Deterministic state transition over dt frames. w and h pass through
/// unchanged in every model; components a model does not use pass through
/// too, so the three models share one state space.
StateVec transition(ModelId model, const StateVec& s, double dt);

/// Observation model: picks [cx, cy, w, h] out of the state.
Vec4 measurement_fn(const StateVec& s);

/// Discrete process noise for one model. Symmetric PSD by construction;
/// components a model never drives get a tiny diagonal floor so Cholesky
/// stays well posed.
StateMat process_noise(ModelId model, double dt, const NoiseConfig& cfg);

}  // namespace immtrack
