#pragma once

#include <array>
#include <optional>
#include <span>

#include "immtrack/ukf.hpp"

namespace immtrack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct ImmConfig {
    Mat3 tpm = tpm_from_self(0.95);  // row-stochastic model transition matrix
    Vec3 mu_init = Vec3::Constant(1.0 / 3.0);
    bool adaptive_tpm = false;   // likelihood-driven self-transition sharpening
    double theta_stable = 0.55;  // windowed mean mu_CV at or above this = stable
    int stability_window = 3;    // frames

    /// Uniform off-diagonal matrix with the given self-transition probability.
    static Mat3 tpm_from_self(double self);
};

/// Per-track filter bank.
struct ImmState {
    std::array<Gaussian, kNumModels> models;
    Vec3 mu = Vec3::Constant(1.0 / 3.0);
    Mat3 tpm = ImmConfig::tpm_from_self(0.95);  // effective matrix for the next mix
    Gaussian combined;
    double uncertainty = 0.0;  // u_k, scale-free
    std::array<int, kNumModels> dominance_run{};
};

struct MixResult {
    std::array<Gaussian, kNumModels> mixed;
    Vec3 c;  // predicted model probabilities
};

struct ManeuverScore {
    double score = 0.0;  // 1 - windowed mean of mu_CV
    bool is_stable = false;
};

/// Bank seeded from one Gaussian, all models identical, probabilities from cfg.
ImmState make_imm_state(const Gaussian& init, const ImmConfig& cfg);

/// Standard IMM interaction step. A model whose predicted probability
/// underflows gets the combined estimate as its mixed state.
MixResult mix(const ImmState& s);

/// Moment-matched mixture of the per-model Gaussians.
Gaussian combined_estimate(const std::array<Gaussian, kNumModels>& models, const Vec3& mu);
Gaussian combined_estimate(const ImmState& s);

/// One filter cycle: mix, per-model unscented predict, and, when a
/// measurement is present, per-model update plus likelihood re-weighting.
/// Without a measurement the bank coasts with mu frozen.
ImmState step(const ImmState& s, const std::optional<Vec4>& z, double dt,
              const ImmConfig& cfg, const UtParams& ut, const NoiseConfig& noise,
              const Mat4& measurement_noise);

/// Stability classification over the recent model-probability window.
ManeuverScore maneuver_score(std::span<const Vec3> mu_history, const ImmConfig& cfg);

/// Adaptation primitive: raises one model's self-transition to 0.98,
/// rescaling the rest of its row; rows already at or above stay put.
Mat3 sharpen_tpm(const Mat3& base, int model);

}  // namespace immtrack
