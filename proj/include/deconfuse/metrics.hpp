#ifndef DECONFUSE_METRICS_HPP_
#define DECONFUSE_METRICS_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "deconfuse/io.hpp"

namespace deconfuse::metrics {

using io::TrackedBox;
using io::TrackedFrames;

struct FrameMatch {
  std::vector<std::pair<int, int>> matches;  // (gt id, pred id)
  int fp = 0;
  int fn = 0;
  int idsw = 0;  // switches charged at this frame
};

// Frame-by-frame correspondence with the persistence convention: a ground
// truth keeps its previous prediction while they still overlap at the
// threshold; leftovers are matched by Hungarian on 1 - IoU.
class ClearMatcher {
 public:
  explicit ClearMatcher(double iou_threshold = 0.5)
      : iou_threshold_(iou_threshold) {}

  FrameMatch match_frame(const std::vector<TrackedBox>& gt,
                         const std::vector<TrackedBox>& pred);

 private:
  double iou_threshold_;
  std::unordered_map<int, int> last_match_;  // gt id -> last matched pred id
};

struct ClearCounts {
  int fp = 0;
  int fn = 0;
  int idsw = 0;
  int gt_count = 0;
  int matches = 0;
};

ClearCounts clear_metrics(const TrackedFrames& gt, const TrackedFrames& pred,
                          double iou_threshold = 0.5);

struct IdCounts {
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
};

// Optimal global identity matching maximizing true-positive frames.
IdCounts idf1_counts(const TrackedFrames& gt, const TrackedFrames& pred,
                     double iou_threshold = 0.5);
double idf1(const TrackedFrames& gt, const TrackedFrames& pred,
            double iou_threshold = 0.5);

struct SequenceReport {
  std::string name;
  double mota = 0.0;
  double idf1 = 0.0;
  int idsw = 0;
  int fp = 0;
  int fn = 0;
  int gt_count = 0;
};

struct EvalReport {
  double mota = 0.0;
  double idf1 = 0.0;
  int idsw = 0;
  int fp = 0;
  int fn = 0;
  int gt_count = 0;
  std::vector<SequenceReport> per_sequence;
};

// CLEAR + identity metrics for one sequence. Throws when gt is empty.
EvalReport evaluate(const TrackedFrames& gt, const TrackedFrames& pred,
                    const std::string& name = "seq",
                    double iou_threshold = 0.5);

// Pooled counts across sequences, with a per-sequence breakdown.
EvalReport evaluate_many(
    const std::vector<std::pair<std::string,
                                std::pair<const TrackedFrames*,
                                          const TrackedFrames*>>>& sequences,
    double iou_threshold = 0.5);

// Aligned plain-text table and machine-readable CSV.
std::string format_table(const EvalReport& report);
std::string format_csv(const EvalReport& report);

}  // namespace deconfuse::metrics

#endif  // DECONFUSE_METRICS_HPP_
