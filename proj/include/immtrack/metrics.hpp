#pragma once

#include <map>
#include <string>
#include <vector>

#include "immtrack/mot_io.hpp"

namespace immtrack {

/// CLEAR-MOT counts. mota is undefined (and `defined` false) when gt is empty.
struct ClearResult {
    double mota = 0.0;
    long long fp = 0, fn = 0, ids = 0;
    long long gt_count = 0;
    bool defined = false;
};

/// Per-frame matching carries over each ground-truth identity's most recent
/// correspondence when it still overlaps, then resolves the remainder by
/// minimum-cost matching at the IoU threshold. An identity switch is counted
/// when a ground-truth id's matched prediction id changes between its
/// consecutive matched frames.
ClearResult clear_mot(const SequenceData& gt, const SequenceData& res, double iou_min = 0.5);

/// Identity F1: global trajectory-level bipartite mapping between gt ids and
/// prediction ids maximizing identity-consistent hits (per-frame IoU >= iou_min).
double idf1(const SequenceData& gt, const SequenceData& res, double iou_min = 0.5);

struct HotaResult {
    double hota = 0.0, assa = 0.0, deta = 0.0;
    std::vector<double> alphas;          // 0.05 .. 0.95
    std::vector<double> per_alpha;       // HOTA(alpha) = sqrt(DetA(alpha) * AssA(alpha))
    std::vector<double> per_alpha_deta;  // DetA(alpha)
    std::vector<double> per_alpha_assa;  // AssA(alpha)
};

/// Higher-order tracking accuracy over localization thresholds 0.05..0.95:
/// a first pass accumulates global alignment scores between id pairs, a second
/// pass matches per frame maximizing alignment-weighted similarity; per alpha,
/// HOTA(a) = sqrt(DetA(a) * AssA(a)); headline scores are means over alpha.
HotaResult hota(const SequenceData& gt, const SequenceData& res);

struct SequenceMetrics {
    HotaResult hota;
    double idf1 = 0.0;
    ClearResult clear;
};

SequenceMetrics evaluate(const SequenceData& gt, const SequenceData& res, double iou_min = 0.5);

struct DatasetStats {
    double gpr = 0.0;        // mean presence fraction over ids
    double mmso_like = 0.0;  // mean over ids of max per-frame speed / box diagonal
    double mmsao_like = 0.0;  // mean over ids of max successive speed change
    int seq_len = 0;
    std::map<int, int> presence;  // id -> frames present
};

/// Presence and motion-complexity statistics of identity-labeled data.
/// Ids present in fewer than 2 (speed) or 3 (speed-change) frames contribute
/// only to presence.
DatasetStats dataset_stats(const SequenceData& gt);

/// Human-readable metric table plus machine-readable key=value lines.
std::string format_metrics_table(const SequenceMetrics& m, const std::string& name);
std::string format_metrics_kv(const SequenceMetrics& m);

}  // namespace immtrack
