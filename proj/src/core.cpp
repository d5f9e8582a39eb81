#include "deconfuse/core.hpp"

#include <algorithm>
#include <cmath>

namespace deconfuse {

bool bbox_valid(const BBox& b) {
  return std::isfinite(b.cx) && std::isfinite(b.cy) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w > 0.0 && b.h > 0.0;
}

BBox tlwh_to_center(double x, double y, double w, double h) {
  return BBox{x + 0.5 * w, y + 0.5 * h, w, h};
}

Tlwh center_to_tlwh(const BBox& b) {
  return Tlwh{b.cx - 0.5 * b.w, b.cy - 0.5 * b.h, b.w, b.h};
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double loc_sim(const Detection& d, const BBox& predicted) {
  return iou(d.box, predicted);
}

double loc_sim(const BBox& box, const BBox& predicted) {
  return iou(box, predicted);
}

double cos_dist(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.size() != g.size()) {
    throw std::invalid_argument(
        "cos_dist: embedding dimension mismatch (" + std::to_string(f.size()) +
        " vs " + std::to_string(g.size()) + ")");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) dot += f[i] * g[i];
  return 1.0 - dot;
}

void AssignmentSet::add(int detection_id, int track_id) {
  if (det_to_track_.count(detection_id) != 0) {
    throw std::invalid_argument("AssignmentSet: detection " +
                                std::to_string(detection_id) +
                                " already assigned");
  }
  if (track_to_det_.count(track_id) != 0) {
    throw std::invalid_argument("AssignmentSet: track " +
                                std::to_string(track_id) + " already assigned");
  }
  pairs_.emplace_back(detection_id, track_id);
  det_to_track_.emplace(detection_id, track_id);
  track_to_det_.emplace(track_id, detection_id);
}

bool AssignmentSet::has_detection(int detection_id) const {
  return det_to_track_.count(detection_id) != 0;
}

bool AssignmentSet::has_track(int track_id) const {
  return track_to_det_.count(track_id) != 0;
}

std::optional<int> AssignmentSet::track_for(int detection_id) const {
  auto it = det_to_track_.find(detection_id);
  if (it == det_to_track_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> AssignmentSet::detection_for(int track_id) const {
  auto it = track_to_det_.find(track_id);
  if (it == track_to_det_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<int, int>> AssignmentSet::sorted_pairs() const {
  std::vector<std::pair<int, int>> out = pairs_;
  std::sort(out.begin(), out.end());
  return out;
}

bool AssignmentSet::operator==(const AssignmentSet& other) const {
  return sorted_pairs() == other.sorted_pairs();
}

void TrackerConfig::validate() const {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  struct Named {
    const char* name;
    double value;
  };
  const Named thresholds[] = {
      {"kappa", kappa},           {"conf_first", conf_first},
      {"conf_second", conf_second}, {"nms_first", nms_first},
      {"nms_second", nms_second}, {"gate_first", gate_first},
      {"gate_second", gate_second}, {"init_conf", init_conf},
      {"ema_alpha", ema_alpha},
  };
  for (const auto& t : thresholds) {
    if (!in_unit(t.value)) {
      throw std::invalid_argument(std::string("config: ") + t.name +
                                  " must be in [0,1]");
    }
  }
  if (!(nms_first < nms_second)) {
    throw std::invalid_argument("config: nms_first must be < nms_second");
  }
  if (!(conf_second < conf_first)) {
    throw std::invalid_argument("config: conf_second must be < conf_first");
  }
  if (max_age < 1) {
    throw std::invalid_argument("config: max_age must be >= 1");
  }
}

}  // namespace deconfuse
