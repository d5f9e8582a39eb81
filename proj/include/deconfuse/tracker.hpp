#ifndef DECONFUSE_TRACKER_HPP_
#define DECONFUSE_TRACKER_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "deconfuse/core.hpp"
#include "deconfuse/motion.hpp"

namespace deconfuse {

enum class TrackState { Tentative, Tracked, Lost, Removed };

struct Track {
  int id = 0;
  TrackState state = TrackState::Tentative;
  KalmanState kf;
  std::optional<std::vector<double>> feature;  // EMA-smoothed appearance
  int last_update_frame = 0;
  int start_frame = 0;
  int consecutive_hits = 0;
  std::vector<std::pair<int, BBox>> history;  // (frame, observed box)
  BBox predicted;  // current-frame prediction, refreshed each step
};

struct FrameResult {
  struct Entry {
    int track_id = 0;
    BBox box;
    double conf = 0.0;
  };
  int frame = 0;
  std::vector<Entry> outputs;
};

// EMA update: feature <- normalize(alpha * feature + (1 - alpha) * f_d);
// the first observation sets the feature directly.
void update_feature(Track& t, const std::vector<double>& f_d, double alpha);

// Per-frame pipeline: partition, predict, first association, disambiguation
// chain, second association over unreliable detections, lifecycle updates.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg);

  // Frames must be stepped in strictly increasing order and every detection
  // must carry the stepped frame index; violations throw.
  FrameResult step(const std::vector<Detection>& dets, int frame);

  const std::vector<FrameResult>& finalize() const { return results_; }

  int tracks_created() const { return next_id_ - 1; }
  const std::vector<Track>& tracks() const { return tracks_; }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::vector<FrameResult> results_;
  int last_frame_ = 0;
  int next_id_ = 1;
  bool started_ = false;
};

}  // namespace deconfuse

#endif  // DECONFUSE_TRACKER_HPP_
