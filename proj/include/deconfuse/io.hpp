#ifndef DECONFUSE_IO_HPP_
#define DECONFUSE_IO_HPP_

#include <string>
#include <vector>

#include "deconfuse/core.hpp"
#include "deconfuse/tracker.hpp"

namespace deconfuse::io {

// One row of a ground-truth or result file: identity kept.
struct TrackedBox {
  int frame = 0;
  int id = 0;
  BBox box;  // center-based (converted at the file boundary)
  double conf = 0.0;
};

// Frame-indexed rows: element f-1 holds frame f (frames are 1-based).
using TrackedFrames = std::vector<std::vector<TrackedBox>>;

struct SequenceBundle {
  std::string name;
  int frame_count = 0;
  // frames[f-1] holds frame f's detections in file line order.
  std::vector<std::vector<Detection>> frames;
  bool has_embeddings = false;
};

// Parse `frame,id,x,y,w,h,conf,...` detection lines (id ignored, top-left
// converted to center). Malformed input throws with the offending line number.
SequenceBundle read_det(const std::string& path);

// Attach one embedding row per detection-file line, L2-normalized on load.
// Row-count or dimension inconsistencies throw.
void read_embeddings(const std::string& path, SequenceBundle& bundle);

// Parse ground-truth / result files, identities kept.
TrackedFrames read_tracked(const std::string& path);

// `frame,id,x,y,w,h,conf,-1,-1,-1` with top-left coords, fixed 2 decimals,
// sorted by (frame, id). Written atomically (temp file + rename).
void write_results(const std::string& path,
                   const std::vector<FrameResult>& results);
void write_tracked(const std::string& path, const TrackedFrames& frames);
void write_det(const std::string& path, const SequenceBundle& bundle);
void write_embeddings(const std::string& path, const SequenceBundle& bundle);

// `key = value` lines with # comments; unspecified keys take the defaults.
// Unknown keys and invariant violations throw.
TrackerConfig read_config(const std::string& path);

}  // namespace deconfuse::io

#endif  // DECONFUSE_IO_HPP_
