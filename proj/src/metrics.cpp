#include "immtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "immtrack/association.hpp"

namespace immtrack {

namespace {

const std::vector<TrackedBox> kNoBoxes;

const std::vector<TrackedBox>& boxes_at(const SequenceData& seq, int frame) {
    const auto it = seq.frames.find(frame);
    return it == seq.frames.end() ? kNoBoxes : it->second;
}

std::set<int> frame_union(const SequenceData& a, const SequenceData& b) {
    std::set<int> frames;
    for (const auto& [f, v] : a.frames) frames.insert(f);
    for (const auto& [f, v] : b.frames) frames.insert(f);
    return frames;
}

}  // namespace

ClearResult clear_mot(const SequenceData& gt, const SequenceData& res, double iou_min) {
    ClearResult out;
    std::map<int, int> last_matched;  // gt id -> most recent matched prediction id

    for (int frame : frame_union(gt, res)) {
        const auto& gb = boxes_at(gt, frame);
        const auto& rb = boxes_at(res, frame);
        out.gt_count += static_cast<long long>(gb.size());

        std::vector<char> g_used(gb.size(), 0), r_used(rb.size(), 0);
        std::map<int, int> pred_index;
        for (int j = 0; j < static_cast<int>(rb.size()); ++j) pred_index[rb[j].id] = j;

        // Keep surviving correspondences first (scan in gt-id order for
        // determinism); they can never produce a switch.
        std::vector<int> g_order(gb.size());
        for (int i = 0; i < static_cast<int>(gb.size()); ++i) g_order[i] = i;
        std::sort(g_order.begin(), g_order.end(),
                  [&gb](int a, int b) { return gb[a].id < gb[b].id; });
        std::vector<std::pair<int, int>> matches;
        for (int i : g_order) {
            const auto prev = last_matched.find(gb[i].id);
            if (prev == last_matched.end()) continue;
            const auto at = pred_index.find(prev->second);
            if (at == pred_index.end() || r_used[at->second]) continue;
            if (iou(gb[i].box, rb[at->second].box) >= iou_min) {
                g_used[i] = r_used[at->second] = 1;
                matches.emplace_back(i, at->second);
            }
        }

        // Remaining pairs: minimum-cost matching on 1 - IoU, gated.
        std::vector<int> g_free, r_free;
        for (int i = 0; i < static_cast<int>(gb.size()); ++i) {
            if (!g_used[i]) g_free.push_back(i);
        }
        for (int j = 0; j < static_cast<int>(rb.size()); ++j) {
            if (!r_used[j]) r_free.push_back(j);
        }
        if (!g_free.empty() && !r_free.empty()) {
            Eigen::MatrixXd costs(g_free.size(), r_free.size());
            for (std::size_t r = 0; r < g_free.size(); ++r) {
                for (std::size_t c = 0; c < r_free.size(); ++c) {
                    const double v = iou(gb[g_free[r]].box, rb[r_free[c]].box);
                    costs(r, c) = v >= iou_min ? 1.0 - v : kGatedCost;
                }
            }
            const Assignment a = solve_assignment(costs, kGatedCost);
            for (const auto& [r, c] : a.matches) {
                const int i = g_free[r], j = r_free[c];
                g_used[i] = r_used[j] = 1;
                matches.emplace_back(i, j);
            }
        }

        for (const auto& [i, j] : matches) {
            const auto prev = last_matched.find(gb[i].id);
            if (prev != last_matched.end() && prev->second != rb[j].id) ++out.ids;
            last_matched[gb[i].id] = rb[j].id;
        }
        for (std::size_t i = 0; i < gb.size(); ++i) out.fn += !g_used[i];
        for (std::size_t j = 0; j < rb.size(); ++j) out.fp += !r_used[j];
    }

    out.defined = out.gt_count > 0;
    out.mota = out.defined
                   ? 1.0 - static_cast<double>(out.fp + out.fn + out.ids) / out.gt_count
                   : std::numeric_limits<double>::quiet_NaN();
    return out;
}

namespace {

// Dense per-id indexing shared by idf1 and hota.
struct IdIndex {
    std::map<int, int> to_dense;
    std::vector<long long> det_count;  // boxes per id over the sequence

    int index(int id) {
        const auto [it, fresh] = to_dense.try_emplace(id, static_cast<int>(to_dense.size()));
        if (fresh) det_count.push_back(0);
        return it->second;
    }
};

}  // namespace

double idf1(const SequenceData& gt, const SequenceData& res, double iou_min) {
    IdIndex gid, pid;
    std::map<std::pair<int, int>, long long> overlap;  // (gt idx, pred idx) -> hit frames

    for (int frame : frame_union(gt, res)) {
        for (const TrackedBox& g : boxes_at(gt, frame)) ++gid.det_count[gid.index(g.id)];
        for (const TrackedBox& p : boxes_at(res, frame)) ++pid.det_count[pid.index(p.id)];
        for (const TrackedBox& g : boxes_at(gt, frame)) {
            for (const TrackedBox& p : boxes_at(res, frame)) {
                if (iou(g.box, p.box) >= iou_min) {
                    ++overlap[{gid.to_dense[g.id], pid.to_dense[p.id]}];
                }
            }
        }
    }

    long long gt_total = 0, res_total = 0;
    for (long long n : gid.det_count) gt_total += n;
    for (long long n : pid.det_count) res_total += n;
    if (gt_total + res_total == 0) return 1.0;  // vacuously perfect

    long long idtp = 0;
    if (!overlap.empty()) {
        const int ng = static_cast<int>(gid.det_count.size());
        const int np = static_cast<int>(pid.det_count.size());
        long long max_w = 0;
        for (const auto& [key, w] : overlap) max_w = std::max(max_w, w);
        // Max-weight mapping as min-cost assignment; zero-overlap pairs are
        // admissible at cost max_w, so forced matches never change the sum.
        Eigen::MatrixXd costs(ng, np);
        costs.setConstant(static_cast<double>(max_w));
        for (const auto& [key, w] : overlap) {
            costs(key.first, key.second) = static_cast<double>(max_w - w);
        }
        const Assignment a = solve_assignment(costs, kGatedCost);
        for (const auto& [r, c] : a.matches) {
            const auto it = overlap.find({r, c});
            if (it != overlap.end()) idtp += it->second;
        }
    }

    const long long idfn = gt_total - idtp;
    const long long idfp = res_total - idtp;
    return 2.0 * static_cast<double>(idtp) / static_cast<double>(2 * idtp + idfp + idfn);
}

HotaResult hota(const SequenceData& gt, const SequenceData& res) {
    HotaResult out;
    for (int i = 1; i <= 19; ++i) out.alphas.push_back(0.05 * i);
    out.per_alpha.assign(out.alphas.size(), 0.0);
    out.per_alpha_deta.assign(out.alphas.size(), 0.0);
    out.per_alpha_assa.assign(out.alphas.size(), 0.0);

    IdIndex gid, pid;
    struct FrameIds {
        std::vector<int> g, p;          // dense ids
        Eigen::MatrixXd sim;            // IoU, g x p
    };
    std::vector<FrameIds> per_frame;

    for (int frame : frame_union(gt, res)) {
        const auto& gb = boxes_at(gt, frame);
        const auto& rb = boxes_at(res, frame);
        FrameIds fi;
        for (const TrackedBox& g : gb) {
            fi.g.push_back(gid.index(g.id));
            ++gid.det_count[fi.g.back()];
        }
        for (const TrackedBox& p : rb) {
            fi.p.push_back(pid.index(p.id));
            ++pid.det_count[fi.p.back()];
        }
        fi.sim.resize(gb.size(), rb.size());
        for (std::size_t i = 0; i < gb.size(); ++i) {
            for (std::size_t j = 0; j < rb.size(); ++j) {
                fi.sim(i, j) = iou(gb[i].box, rb[j].box);
            }
        }
        per_frame.push_back(std::move(fi));
    }

    long long gt_total = 0, res_total = 0;
    for (long long n : gid.det_count) gt_total += n;
    for (long long n : pid.det_count) res_total += n;

    const int ng = static_cast<int>(gid.det_count.size());
    const int np = static_cast<int>(pid.det_count.size());
    Eigen::MatrixXd potential = Eigen::MatrixXd::Zero(std::max(ng, 1), std::max(np, 1));

    // Pass 1: soft co-occurrence of id pairs, normalized per frame so crowded
    // frames do not dominate.
    for (const FrameIds& fi : per_frame) {
        const auto rows = fi.sim.rows();
        const auto cols = fi.sim.cols();
        if (rows == 0 || cols == 0) continue;
        const Eigen::VectorXd row_sum = fi.sim.rowwise().sum();
        const Eigen::VectorXd col_sum = fi.sim.colwise().sum();
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double denom = row_sum(i) + col_sum(j) - fi.sim(i, j);
                if (denom > 1e-12) {
                    potential(fi.g[i], fi.p[j]) += fi.sim(i, j) / denom;
                }
            }
        }
    }
    Eigen::MatrixXd global_align = Eigen::MatrixXd::Zero(potential.rows(), potential.cols());
    for (int i = 0; i < ng; ++i) {
        for (int j = 0; j < np; ++j) {
            const double denom = static_cast<double>(gid.det_count[i] + pid.det_count[j]) -
                                 potential(i, j);
            if (denom > 1e-12) global_align(i, j) = potential(i, j) / denom;
        }
    }

    // Pass 2: per threshold, per frame, match maximizing alignment-weighted
    // similarity; a match is a true positive only if it clears the threshold.
    constexpr double kAlphaEps = 1e-12;
    double hota_sum = 0.0, assa_sum = 0.0, deta_sum = 0.0;
    for (std::size_t ai = 0; ai < out.alphas.size(); ++ai) {
        const double alpha = out.alphas[ai];
        long long tp = 0;
        std::map<std::pair<int, int>, long long> pair_tp;

        for (const FrameIds& fi : per_frame) {
            const auto rows = fi.sim.rows();
            const auto cols = fi.sim.cols();
            if (rows == 0 || cols == 0) continue;
            Eigen::MatrixXd score(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i) {
                for (Eigen::Index j = 0; j < cols; ++j) {
                    score(i, j) = global_align(fi.g[i], fi.p[j]) * fi.sim(i, j);
                }
            }
            const double top = score.maxCoeff();
            const Eigen::MatrixXd shifted = (top - score.array()).matrix();
            const Assignment a = solve_assignment(shifted, kGatedCost);
            for (const auto& [i, j] : a.matches) {
                if (fi.sim(i, j) >= alpha - kAlphaEps) {
                    ++tp;
                    ++pair_tp[{fi.g[i], fi.p[j]}];
                }
            }
        }

        const long long fn = gt_total - tp;
        const long long fp = res_total - tp;
        const double deta = (tp + fn + fp) > 0
                                ? static_cast<double>(tp) / static_cast<double>(tp + fn + fp)
                                : 0.0;
        double assa = 0.0;
        if (tp > 0) {
            for (const auto& [key, n] : pair_tp) {
                const double ass_iou =
                    static_cast<double>(n) /
                    static_cast<double>(gid.det_count[key.first] + pid.det_count[key.second] - n);
                assa += ass_iou * static_cast<double>(n);
            }
            assa /= static_cast<double>(tp);
        }
        out.per_alpha[ai] = std::sqrt(deta * assa);
        out.per_alpha_deta[ai] = deta;
        out.per_alpha_assa[ai] = assa;
        hota_sum += out.per_alpha[ai];
        assa_sum += assa;
        deta_sum += deta;
    }

    const double n_alpha = static_cast<double>(out.alphas.size());
    out.hota = hota_sum / n_alpha;
    out.assa = assa_sum / n_alpha;
    out.deta = deta_sum / n_alpha;
    return out;
}

SequenceMetrics evaluate(const SequenceData& gt, const SequenceData& res, double iou_min) {
    SequenceMetrics m;
    m.hota = hota(gt, res);
    m.idf1 = idf1(gt, res, iou_min);
    m.clear = clear_mot(gt, res, iou_min);
    return m;
}

DatasetStats dataset_stats(const SequenceData& gt) {
    DatasetStats out;
    if (gt.empty()) return out;
    out.seq_len = gt.max_frame() - gt.min_frame() + 1;

    struct Obs {
        int frame;
        double cx, cy, diag;
    };
    std::map<int, std::vector<Obs>> tracks;
    for (const auto& [frame, boxes] : gt.frames) {
        for (const TrackedBox& b : boxes) {
            tracks[b.id].push_back(
                {frame, b.box.cx(), b.box.cy(), std::hypot(b.box.w, b.box.h)});
            ++out.presence[b.id];
        }
    }

    double gpr_sum = 0.0, mmso_sum = 0.0, mmsao_sum = 0.0;
    int mmso_n = 0, mmsao_n = 0;
    for (const auto& [id, obs] : tracks) {
        gpr_sum += static_cast<double>(obs.size()) / out.seq_len;

        // Relative speed between consecutive present frames only.
        std::vector<double> speeds;
        for (std::size_t i = 0; i + 1 < obs.size(); ++i) {
            if (obs[i + 1].frame != obs[i].frame + 1 || obs[i].diag <= 0.0) continue;
            speeds.push_back(std::hypot(obs[i + 1].cx - obs[i].cx, obs[i + 1].cy - obs[i].cy) /
                             obs[i].diag);
        }
        if (!speeds.empty()) {
            mmso_sum += *std::max_element(speeds.begin(), speeds.end());
            ++mmso_n;
        }
        if (speeds.size() >= 2) {
            double peak = 0.0;
            for (std::size_t i = 0; i + 1 < speeds.size(); ++i) {
                peak = std::max(peak, std::abs(speeds[i + 1] - speeds[i]));
            }
            mmsao_sum += peak;
            ++mmsao_n;
        }
    }
    out.gpr = gpr_sum / static_cast<double>(tracks.size());
    out.mmso_like = mmso_n > 0 ? mmso_sum / mmso_n : 0.0;
    out.mmsao_like = mmsao_n > 0 ? mmsao_sum / mmsao_n : 0.0;
    return out;
}

std::string format_metrics_table(const SequenceMetrics& m, const std::string& name) {
    char row[256];
    std::ostringstream os;
    os << "Sequence: " << (name.empty() ? "(unnamed)" : name) << "\n";
    os << "  HOTA   AssA   DetA   IDF1   MOTA       FP       FN     IDs      GT\n";
    if (m.clear.defined) {
        std::snprintf(row, sizeof row,
                      "%6.4f %6.4f %6.4f %6.4f %6.4f %8lld %8lld %7lld %7lld\n", m.hota.hota,
                      m.hota.assa, m.hota.deta, m.idf1, m.clear.mota, m.clear.fp, m.clear.fn,
                      m.clear.ids, m.clear.gt_count);
    } else {
        std::snprintf(row, sizeof row, "%6.4f %6.4f %6.4f %6.4f    n/a %8lld %8lld %7lld %7lld\n",
                      m.hota.hota, m.hota.assa, m.hota.deta, m.idf1, m.clear.fp, m.clear.fn,
                      m.clear.ids, m.clear.gt_count);
    }
    os << row;
    return os.str();
}

std::string format_metrics_kv(const SequenceMetrics& m) {
    char buf[96];
    std::ostringstream os;
    const auto kv = [&os, &buf](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s = %.6f\n", key, v);
        os << buf;
    };
    kv("hota", m.hota.hota);
    kv("assa", m.hota.assa);
    kv("deta", m.hota.deta);
    kv("idf1", m.idf1);
    if (m.clear.defined) {
        kv("mota", m.clear.mota);
    } else {
        os << "mota = n/a\n";
    }
    os << "fp = " << m.clear.fp << "\n";
    os << "fn = " << m.clear.fn << "\n";
    os << "ids = " << m.clear.ids << "\n";
    os << "gt = " << m.clear.gt_count << "\n";
    return os.str();
}

}  // namespace immtrack
