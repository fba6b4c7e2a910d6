#pragma once

#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "immtrack/geometry.hpp"
#include "immtrack/ukf.hpp"

namespace immtrack {

/// Cost-fusion and gating knobs.
struct AufConfig {
    double alpha_min = 0.3;
    double alpha_max = 0.8;
    double u_ref = 1.0;             // soft knee of the uncertainty weight
    double lambda_stable = 1.0;     // motion-cost factor for stable tracks
    double lambda_maneuver = 0.5;   // discounted for maneuvering tracks
    double gate_chi2 = 13.277;      // 4-dof chi-square 0.99 quantile
    double stage1_iou_min = 0.2;
    double stage2_iou_min = 0.05;
    double stage3_iou_min = 0.0;
    double stage3_gate_scale = 2.0;  // lost-track motion gate widening
};

/// Association stages, in execution order.
enum class StageId { kStable, kManeuver, kLost, kLowConf };

/// Marker for gated-out cost matrix entries.
inline constexpr double kGatedCost = std::numeric_limits<double>::infinity();

struct MotionCost {
    double cost = 1.0;  // clipped to [0, 1]
    double d2 = std::numeric_limits<double>::infinity();
    bool degenerate = false;  // singular innovation covariance
};

/// Mahalanobis motion cost of a detection against a predicted state.
MotionCost motion_cost(const Gaussian& predicted, const Detection& det, const Mat4& s,
                       const AufConfig& cfg);

/// Uncertainty-adaptive weight: alpha_min + (alpha_max - alpha_min) * u / (u + u_ref).
double adaptive_weight(double u_k, const AufConfig& cfg);

/// Fused association cost alpha*(1 - iou) + (1 - alpha)*c_mot*lambda_state.
/// Larger uncertainty shifts weight toward spatial overlap.
double fuse(double iou_raw, double c_mot, double u_k, bool is_stable, const AufConfig& cfg);

/// Stage admissibility: motion gate plus per-stage IoU floor.
bool gate(double d2, double iou_raw, StageId stage, const AufConfig& cfg);

struct Assignment {
    std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
    double total_cost = 0.0;
};

/// Minimum-cost maximum-cardinality matching over the finite entries of a
/// rectangular cost matrix (successive shortest augmenting paths). Entries
/// must be non-negative or kGatedCost. Pairs costing more than max_cost are
/// stripped after solving. Ties between equal-cost optima are normalized
/// toward (row, col) lexicographic order.
Assignment solve_assignment(const Eigen::MatrixXd& costs, double max_cost);

}  // namespace immtrack
