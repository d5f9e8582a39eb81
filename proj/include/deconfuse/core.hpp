#ifndef DECONFUSE_CORE_HPP_
#define DECONFUSE_CORE_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace deconfuse {

// Center-based bounding box. File formats use top-left; conversion happens
// at the I/O boundary only.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return cx - 0.5 * w; }
  double top() const { return cy - 0.5 * h; }
  double right() const { return cx + 0.5 * w; }
  double bottom() const { return cy + 0.5 * h; }
  double area() const { return w * h; }
};

bool bbox_valid(const BBox& b);

struct Tlwh {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

BBox tlwh_to_center(double x, double y, double w, double h);
Tlwh center_to_tlwh(const BBox& b);

// One detector output box in one frame. Embeddings are unit-normalized on
// load; source_line is 1-based provenance into the originating file.
struct Detection {
  int frame = 0;
  BBox box;
  double conf = 0.0;
  std::optional<std::vector<double>> embedding;
  long source_line = 0;
};

struct FramePartition {
  std::vector<Detection> first;
  std::vector<Detection> second;
  std::vector<Detection> discarded;
};

double iou(const BBox& a, const BBox& b);

// Positional similarity of a detection against a track's predicted box.
double loc_sim(const Detection& d, const BBox& predicted);
double loc_sim(const BBox& box, const BBox& predicted);

// 1 - dot(f, g) for unit vectors. Throws on dimension mismatch.
double cos_dist(const std::vector<double>& f, const std::vector<double>& g);

// Conflict-free set of (detection_id, track_id) pairs. Both sides are
// injective; add() throws if either id is already present.
class AssignmentSet {
 public:
  AssignmentSet() = default;

  void add(int detection_id, int track_id);
  bool has_detection(int detection_id) const;
  bool has_track(int track_id) const;
  std::optional<int> track_for(int detection_id) const;
  std::optional<int> detection_for(int track_id) const;

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  // Pairs ordered by detection id; use for deterministic iteration.
  std::vector<std::pair<int, int>> sorted_pairs() const;

  bool operator==(const AssignmentSet& other) const;

 private:
  std::vector<std::pair<int, int>> pairs_;
  std::unordered_map<int, int> det_to_track_;
  std::unordered_map<int, int> track_to_det_;
};

// All tracker thresholds plus module toggles, defaulted to the reference
// operating point on top of ByteTrack-style settings.
struct TrackerConfig {
  double kappa = 0.3;        // confusion reduction factor
  double conf_first = 0.6;   // reliable-detection confidence threshold
  double conf_second = 0.1;  // unreliable-detection confidence floor
  double nms_first = 0.7;    // suppression threshold for the reliable band
  double nms_second = 0.95;  // extended suppression threshold for occluded boxes
  double gate_first = 0.2;   // min LocSim accepted by the first association
  double gate_second = 0.5;  // min LocSim accepted by the second association
  double init_conf = 0.7;    // min confidence to spawn a new track
  int max_age = 30;          // frames a lost track survives without update
  double ema_alpha = 0.9;    // appearance feature smoothing factor

  bool enable_onms = true;
  bool enable_ddm = true;
  bool enable_tdm = true;
  bool enable_adm = true;
  bool enable_second_stage = true;

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

}  // namespace deconfuse

#endif  // DECONFUSE_CORE_HPP_
