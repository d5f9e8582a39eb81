#include "deconfuse/onms.hpp"

#include <algorithm>

namespace deconfuse::onms {

namespace {

FramePartition materialize(const std::vector<Detection>& dets,
                           const PartitionIndices& idx) {
  FramePartition out;
  out.first.reserve(idx.first.size());
  out.second.reserve(idx.second.size());
  out.discarded.reserve(idx.discarded.size());
  for (int i : idx.first) out.first.push_back(dets[i]);
  for (int i : idx.second) out.second.push_back(dets[i]);
  for (int i : idx.discarded) out.discarded.push_back(dets[i]);
  return out;
}

PartitionIndices split(const std::vector<Detection>& dets, double conf_first,
                       double conf_second, double nms_first,
                       double nms_second) {
  const auto scores = suppression_scores(dets);
  PartitionIndices out;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const double c = dets[i].conf;
    const double u = scores[i].u;
    if (c >= conf_first && u <= nms_first) {
      out.first.push_back(static_cast<int>(i));
    } else if (c >= conf_second && c < conf_first && u <= nms_first) {
      out.second.push_back(static_cast<int>(i));
    } else if (c >= conf_first && u > nms_first && u <= nms_second) {
      out.second.push_back(static_cast<int>(i));
    } else {
      out.discarded.push_back(static_cast<int>(i));
    }
  }
  return out;
}

}  // namespace

std::vector<SuppressionScore> suppression_scores(
    const std::vector<Detection>& dets) {
  std::vector<SuppressionScore> scores(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    scores[i].det_id = static_cast<int>(i);
    double u = 0.0;
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (j == i) continue;
      const bool higher = dets[j].conf > dets[i].conf ||
                          (dets[j].conf == dets[i].conf && j < i);
      if (!higher) continue;
      u = std::max(u, iou(dets[i].box, dets[j].box));
    }
    scores[i].u = u;
  }
  return scores;
}

PartitionIndices partition_indices(const std::vector<Detection>& dets,
                                   const TrackerConfig& cfg) {
  return split(dets, cfg.conf_first, cfg.conf_second, cfg.nms_first,
               cfg.nms_second);
}

FramePartition partition(const std::vector<Detection>& dets,
                         const TrackerConfig& cfg) {
  return materialize(dets, partition_indices(dets, cfg));
}

PartitionIndices partition_single_indices(const std::vector<Detection>& dets,
                                          const TrackerConfig& cfg) {
  return split(dets, cfg.conf_first, cfg.conf_second, cfg.nms_first,
               cfg.nms_first);
}

FramePartition partition_single(const std::vector<Detection>& dets,
                                const TrackerConfig& cfg) {
  return materialize(dets, partition_single_indices(dets, cfg));
}

}  // namespace deconfuse::onms
