#ifndef DECONFUSE_ONMS_HPP_
#define DECONFUSE_ONMS_HPP_

#include <vector>

#include "deconfuse/core.hpp"

namespace deconfuse::onms {

// Per-detection suppression score: max IoU against strictly-higher-confidence
// detections of the same frame (0 when that set is empty).
struct SuppressionScore {
  int det_id = 0;  // index into the input list
  double u = 0.0;
};

// One-shot scores over all raw detections of a frame. Exact confidence ties
// are broken by input order: the earlier detection counts as higher.
std::vector<SuppressionScore> suppression_scores(
    const std::vector<Detection>& dets);

// Index-level partition: first / second / discarded as positions into the
// input list, each in input order.
struct PartitionIndices {
  std::vector<int> first;
  std::vector<int> second;
  std::vector<int> discarded;
};

PartitionIndices partition_indices(const std::vector<Detection>& dets,
                                   const TrackerConfig& cfg);

// Two-threshold occlusion-aware split of one frame's detections.
FramePartition partition(const std::vector<Detection>& dets,
                         const TrackerConfig& cfg);

// Single-NMS-threshold reduction (two confidence bands only): equivalent to
// partition with nms_second == nms_first.
PartitionIndices partition_single_indices(const std::vector<Detection>& dets,
                                          const TrackerConfig& cfg);
FramePartition partition_single(const std::vector<Detection>& dets,
                                const TrackerConfig& cfg);

}  // namespace deconfuse::onms

#endif  // DECONFUSE_ONMS_HPP_
