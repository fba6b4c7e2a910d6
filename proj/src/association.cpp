#include "immtrack/association.hpp"

#include <algorithm>
#include <cmath>

namespace immtrack {

MotionCost motion_cost(const Gaussian& predicted, const Detection& det, const Mat4& s,
                       const AufConfig& cfg) {
    MotionCost mc;
    Eigen::LLT<Mat4> llt(s);
    if (llt.info() != Eigen::Success) {
        mc.degenerate = true;  // gated out; caller logs once per track
        return mc;
    }
    const Vec4 nu = box_to_measurement(det.box) - measurement_fn(predicted.mean);
    mc.d2 = nu.dot(llt.solve(nu));
    mc.cost = std::min(mc.d2 / cfg.gate_chi2, 1.0);
    return mc;
}

double adaptive_weight(double u_k, const AufConfig& cfg) {
    return cfg.alpha_min + (cfg.alpha_max - cfg.alpha_min) * u_k / (u_k + cfg.u_ref);
}

double fuse(double iou_raw, double c_mot, double u_k, bool is_stable, const AufConfig& cfg) {
    const double c_iou = 1.0 - iou_raw;
    const double alpha = adaptive_weight(u_k, cfg);
    const double lambda_state = is_stable ? cfg.lambda_stable : cfg.lambda_maneuver;
    return alpha * c_iou + (1.0 - alpha) * c_mot * lambda_state;
}

bool gate(double d2, double iou_raw, StageId stage, const AufConfig& cfg) {
    double iou_min = cfg.stage2_iou_min;
    double gate_scale = 1.0;
    switch (stage) {
        case StageId::kStable: iou_min = cfg.stage1_iou_min; break;
        case StageId::kManeuver: break;
        case StageId::kLost:
            iou_min = cfg.stage3_iou_min;
            gate_scale = cfg.stage3_gate_scale;
            break;
        case StageId::kLowConf: break;  // reuses the stage-2 thresholds
    }
    return d2 <= cfg.gate_chi2 * gate_scale && iou_raw >= iou_min;
}

namespace {

constexpr double kInfDist = std::numeric_limits<double>::infinity();

bool admissible(double c) { return std::isfinite(c); }

// One Dijkstra phase of the successive-shortest-path matching: from all
// unmatched rows, find the cheapest alternating path to a free column under
// the current potentials. Returns the target column or -1.
struct PathState {
    std::vector<double> dist_row, dist_col;
    std::vector<int> parent_col;  // column -> row that reached it
    std::vector<char> done_row, done_col;
};

int dijkstra_phase(const Eigen::MatrixXd& c, const std::vector<int>& match_row,
                   const std::vector<int>& match_col, const std::vector<double>& u,
                   const std::vector<double>& v, PathState* ps) {
    const int rows = static_cast<int>(c.rows());
    const int cols = static_cast<int>(c.cols());
    ps->dist_row.assign(rows, kInfDist);
    ps->dist_col.assign(cols, kInfDist);
    ps->parent_col.assign(cols, -1);
    ps->done_row.assign(rows, 0);
    ps->done_col.assign(cols, 0);
    for (int r = 0; r < rows; ++r) {
        if (match_row[r] < 0) ps->dist_row[r] = 0.0;
    }

    while (true) {
        // Linear-scan extraction, rows before columns, keeps ties deterministic.
        int best_row = -1, best_col = -1;
        double best = kInfDist;
        for (int r = 0; r < rows; ++r) {
            if (!ps->done_row[r] && ps->dist_row[r] < best) {
                best = ps->dist_row[r];
                best_row = r;
                best_col = -1;
            }
        }
        for (int col = 0; col < cols; ++col) {
            if (!ps->done_col[col] && ps->dist_col[col] < best) {
                best = ps->dist_col[col];
                best_col = col;
                best_row = -1;
            }
        }
        if (best_row < 0 && best_col < 0) return -1;  // nothing reachable

        if (best_row >= 0) {
            ps->done_row[best_row] = 1;
            for (int col = 0; col < cols; ++col) {
                if (ps->done_col[col] || !admissible(c(best_row, col))) continue;
                const double reduced = c(best_row, col) - u[best_row] - v[col];
                const double nd = ps->dist_row[best_row] + reduced;
                if (nd < ps->dist_col[col]) {
                    ps->dist_col[col] = nd;
                    ps->parent_col[col] = best_row;
                }
            }
        } else {
            if (match_col[best_col] < 0) return best_col;  // free column popped
            ps->done_col[best_col] = 1;
            const int r = match_col[best_col];  // matched edge back to its row, tight
            if (ps->dist_col[best_col] < ps->dist_row[r]) {
                ps->dist_row[r] = ps->dist_col[best_col];
            }
        }
    }
}

// Pairwise exchanges toward (row, col) lexicographic order among equal-cost
// optima. Each accepted move strictly decreases the lex key, so this
// terminates.
void normalize_ties(const Eigen::MatrixXd& c, std::vector<int>& match_row,
                    std::vector<int>& match_col) {
    const int rows = static_cast<int>(c.rows());
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r1 = 0; r1 < rows; ++r1) {
            if (match_row[r1] < 0) continue;
            const int c1 = match_row[r1];
            // Same row, cheaper-index column of equal cost.
            for (int c2 = 0; c2 < c1; ++c2) {
                if (match_col[c2] < 0 && admissible(c(r1, c2)) && c(r1, c2) == c(r1, c1)) {
                    match_col[c1] = -1;
                    match_row[r1] = c2;
                    match_col[c2] = r1;
                    changed = true;
                    break;
                }
            }
        }
        for (int r1 = 0; r1 < rows; ++r1) {
            const int c1 = match_row[r1];
            for (int r2 = r1 + 1; r2 < rows; ++r2) {
                const int c2 = match_row[r2];
                if (c1 < 0 && c2 >= 0) {
                    // Move a match up to an earlier unmatched row at equal cost.
                    if (admissible(c(r1, c2)) && c(r1, c2) == c(r2, c2)) {
                        match_row[r1] = c2;
                        match_row[r2] = -1;
                        match_col[c2] = r1;
                        changed = true;
                        break;
                    }
                } else if (c1 >= 0 && c2 >= 0 && c2 < c1) {
                    // Column swap that keeps the total exactly.
                    if (admissible(c(r1, c2)) && admissible(c(r2, c1)) &&
                        c(r1, c2) + c(r2, c1) == c(r1, c1) + c(r2, c2)) {
                        match_row[r1] = c2;
                        match_row[r2] = c1;
                        match_col[c2] = r1;
                        match_col[c1] = r2;
                        changed = true;
                        break;
                    }
                }
            }
            if (changed) break;
        }
    }
}

}  // namespace

Assignment solve_assignment(const Eigen::MatrixXd& costs, double max_cost) {
    const int rows = static_cast<int>(costs.rows());
    const int cols = static_cast<int>(costs.cols());
    std::vector<int> match_row(rows, -1), match_col(cols, -1);
    std::vector<double> u(rows, 0.0), v(cols, 0.0);

    PathState ps;
    while (true) {
        const int target = dijkstra_phase(costs, match_row, match_col, u, v, &ps);
        if (target < 0) break;
        const double d_target = ps.dist_col[target];

        // Potential update keeps reduced costs non-negative for later phases.
        for (int r = 0; r < rows; ++r) {
            if (ps.done_row[r]) u[r] += d_target - ps.dist_row[r];
        }
        for (int col = 0; col < cols; ++col) {
            if (ps.done_col[col]) v[col] += ps.dist_col[col] - d_target;
        }

        // Augment: alternate matched/unmatched edges back to a free row.
        int col = target;
        while (col >= 0) {
            const int r = ps.parent_col[col];
            const int prev_col = match_row[r];
            match_row[r] = col;
            match_col[col] = r;
            col = prev_col;
        }
    }

    normalize_ties(costs, match_row, match_col);

    Assignment a;
    for (int r = 0; r < rows; ++r) {
        if (match_row[r] >= 0 && costs(r, match_row[r]) <= max_cost) {
            a.matches.emplace_back(r, match_row[r]);
            a.total_cost += costs(r, match_row[r]);
        } else {
            if (match_row[r] >= 0) match_col[match_row[r]] = -1;
            match_row[r] = -1;
            a.unmatched_rows.push_back(r);
        }
    }
    for (int col = 0; col < cols; ++col) {
        if (match_col[col] < 0) a.unmatched_cols.push_back(col);
    }
    return a;
}

}  // namespace immtrack
