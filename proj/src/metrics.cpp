#include "dsmt/metrics.hpp"

#include "dsmt/error.hpp"
#include "dsmt/hungarian.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace dsmt {

namespace {

using FrameBoxes = std::map<int, std::vector<const TrackedBox*>>;

FrameBoxes group_by_frame(std::span<const TrackedBox> boxes, bool care, const char* side) {
    FrameBoxes out;
    for (const auto& b : boxes) {
        if (b.dont_care == care) continue;
        out[b.frame_idx].push_back(&b);
    }
    if (!care) return out;
    for (auto& [frame, list] : out) {
        std::set<int> seen;
        for (const auto* b : list) {
            if (!seen.insert(b->track_id).second) {
                throw DataError(std::string(side) + " track " + std::to_string(b->track_id) +
                                " appears twice in frame " + std::to_string(frame));
            }
        }
    }
    return out;
}

double center_distance(const Box3D& a, const Box3D& b) {
    return std::sqrt(std::pow(a.center_x - b.center_x, 2) + std::pow(a.center_y - b.center_y, 2) +
                     std::pow(a.center_z - b.center_z, 2));
}

// Nonnegative match weight, or -1 when the pair may not be matched.
double pair_weight(const TrackedBox& g, const TrackedBox& h, const EvalConfig& config) {
    if (config.criterion == MatchCriterion::iou_2d) {
        const double o = iou(g.box2d, h.box2d);
        return o >= config.iou_threshold ? o : -1.0;
    }
    const double d = center_distance(g.box3d, h.box3d);
    return d <= config.distance_threshold_m ? config.distance_threshold_m - d : -1.0;
}

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

MotReport evaluate(std::span<const TrackedBox> hypotheses, std::span<const TrackedBox> ground_truth,
                   const EvalConfig& config) {
    const FrameBoxes gt = group_by_frame(ground_truth, true, "ground-truth");
    const FrameBoxes hyp = group_by_frame(hypotheses, true, "hypothesis");
    const FrameBoxes ignore = group_by_frame(ground_truth, false, "ground-truth");

    std::set<int> frames;
    for (const auto& [f, _] : gt) frames.insert(f);
    for (const auto& [f, _] : hyp) frames.insert(f);

    MotReport r;
    std::map<int, int> last_match;                  // gt track -> hyp track
    std::map<int, std::vector<bool>> coverage;      // gt track -> tracked flag per present frame
    double overlap_sum = 0.0;

    for (int f : frames) {
        static const std::vector<const TrackedBox*> none;
        const auto& g_list = gt.count(f) ? gt.at(f) : none;
        const auto& h_list = hyp.count(f) ? hyp.at(f) : none;
        r.gt_boxes += static_cast<int>(g_list.size());

        std::vector<int> g_to_h(g_list.size(), -1);
        std::vector<bool> h_used(h_list.size(), false);

        // Keep last frame's correspondences that still pass.
        for (std::size_t gi = 0; gi < g_list.size(); ++gi) {
            auto it = last_match.find(g_list[gi]->track_id);
            if (it == last_match.end()) continue;
            for (std::size_t hi = 0; hi < h_list.size(); ++hi) {
                if (h_used[hi] || h_list[hi]->track_id != it->second) continue;
                if (pair_weight(*g_list[gi], *h_list[hi], config) >= 0.0) {
                    g_to_h[gi] = static_cast<int>(hi);
                    h_used[hi] = true;
                }
                break;
            }
        }

        std::vector<int> free_g, free_h;
        for (std::size_t gi = 0; gi < g_list.size(); ++gi) {
            if (g_to_h[gi] < 0) free_g.push_back(static_cast<int>(gi));
        }
        for (std::size_t hi = 0; hi < h_list.size(); ++hi) {
            if (!h_used[hi]) free_h.push_back(static_cast<int>(hi));
        }
        if (!free_g.empty() && !free_h.empty()) {
            WeightMatrix w(free_g.size(), free_h.size());
            for (std::size_t a = 0; a < free_g.size(); ++a) {
                for (std::size_t b = 0; b < free_h.size(); ++b) {
                    w(a, b) = pair_weight(*g_list[free_g[a]], *h_list[free_h[b]], config);
                }
            }
            for (const auto& [a, b] : max_weight_matching(w, 0.0)) {
                g_to_h[free_g[a]] = free_h[b];
                h_used[free_h[b]] = true;
            }
        }

        FrameMatches fm;
        fm.frame_idx = f;
        for (std::size_t gi = 0; gi < g_list.size(); ++gi) {
            const int g_track = g_list[gi]->track_id;
            coverage[g_track].push_back(g_to_h[gi] >= 0);
            if (g_to_h[gi] < 0) {
                ++r.fn;
                continue;
            }
            const auto& h = *h_list[g_to_h[gi]];
            FrameMatch m{g_track, h.track_id, iou(g_list[gi]->box2d, h.box2d), false};
            auto it = last_match.find(g_track);
            if (it != last_match.end() && it->second != h.track_id) {
                m.id_switch = true;
                ++r.ids;
            }
            last_match[g_track] = h.track_id;
            overlap_sum += m.overlap;
            ++r.tp;
            fm.matches.push_back(m);
        }
        for (std::size_t hi = 0; hi < h_list.size(); ++hi) {
            if (h_used[hi]) continue;
            bool ignored = false;
            if (ignore.count(f)) {
                for (const auto* dc : ignore.at(f)) {
                    if (iou(dc->box2d, h_list[hi]->box2d) >= config.iou_threshold) ignored = true;
                }
            }
            if (!ignored) ++r.fp;
        }
        r.per_frame.push_back(std::move(fm));
    }

    if (r.gt_boxes == 0) throw DataError("ground truth is empty; MOTA is undefined");

    r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.ids) / r.gt_boxes;
    r.motp = r.tp > 0 ? overlap_sum / r.tp : 0.0;
    r.gt_tracks = static_cast<int>(coverage.size());
    for (const auto& [track, flags] : coverage) {
        const auto covered = std::count(flags.begin(), flags.end(), true);
        const double ratio = static_cast<double>(covered) / static_cast<double>(flags.size());
        if (ratio > 0.8) ++r.mostly_tracked;
        if (ratio < 0.2) ++r.mostly_lost;
        bool seen = false;
        for (std::size_t i = 0; i < flags.size(); ++i) {
            if (flags[i] && seen && !flags[i - 1]) ++r.frag;
            seen = seen || flags[i];
        }
    }
    r.mt_fraction = static_cast<double>(r.mostly_tracked) / r.gt_tracks;
    r.ml_fraction = static_cast<double>(r.mostly_lost) / r.gt_tracks;
    return r;
}

MotReport combine_reports(std::span<const MotReport> reports) {
    MotReport r;
    double overlap_sum = 0.0;
    for (const auto& x : reports) {
        r.ids += x.ids;
        r.frag += x.frag;
        r.fp += x.fp;
        r.fn += x.fn;
        r.tp += x.tp;
        r.gt_boxes += x.gt_boxes;
        r.gt_tracks += x.gt_tracks;
        r.mostly_tracked += x.mostly_tracked;
        r.mostly_lost += x.mostly_lost;
        overlap_sum += x.motp * x.tp;
    }
    if (r.gt_boxes == 0) throw DataError("ground truth is empty; MOTA is undefined");
    r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.ids) / r.gt_boxes;
    r.motp = r.tp > 0 ? overlap_sum / r.tp : 0.0;
    r.mt_fraction = static_cast<double>(r.mostly_tracked) / r.gt_tracks;
    r.ml_fraction = static_cast<double>(r.mostly_lost) / r.gt_tracks;
    return r;
}

double matching_accuracy(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.empty()) throw StructuralError("matching accuracy needs at least one pair");
    if (scores.size() != labels.size()) throw StructuralError("scores and labels differ in length");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if ((scores[i] > 0.0) != (labels[i] != 0)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

std::string report_to_text(const MotReport& r) {
    std::ostringstream out;
    out << "mota " << shortest(r.mota) << "\n"
        << "motp " << shortest(r.motp) << "\n"
        << "ids " << r.ids << "\n"
        << "frag " << r.frag << "\n"
        << "fp " << r.fp << "\n"
        << "fn " << r.fn << "\n"
        << "tp " << r.tp << "\n"
        << "gt_boxes " << r.gt_boxes << "\n"
        << "gt_tracks " << r.gt_tracks << "\n"
        << "mostly_tracked " << r.mostly_tracked << "\n"
        << "mostly_lost " << r.mostly_lost << "\n"
        << "mt_fraction " << shortest(r.mt_fraction) << "\n"
        << "ml_fraction " << shortest(r.ml_fraction) << "\n";
    return out.str();
}

std::string report_to_json(const MotReport& r) {
    nlohmann::ordered_json j;
    j["mota"] = r.mota;
    j["motp"] = r.motp;
    j["ids"] = r.ids;
    j["frag"] = r.frag;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["tp"] = r.tp;
    j["gt_boxes"] = r.gt_boxes;
    j["gt_tracks"] = r.gt_tracks;
    j["mostly_tracked"] = r.mostly_tracked;
    j["mostly_lost"] = r.mostly_lost;
    j["mt_fraction"] = r.mt_fraction;
    j["ml_fraction"] = r.ml_fraction;
    auto& frames = j["per_frame"] = nlohmann::ordered_json::array();
    for (const auto& fm : r.per_frame) {
        nlohmann::ordered_json f;
        f["frame"] = fm.frame_idx;
        auto& matches = f["matches"] = nlohmann::ordered_json::array();
        for (const auto& m : fm.matches) {
            matches.push_back({{"gt", m.gt_track}, {"hyp", m.hyp_track}, {"iou", m.overlap}, {"id_switch", m.id_switch}});
        }
        frames.push_back(std::move(f));
    }
    return j.dump(2) + "\n";
}

} // namespace dsmt
