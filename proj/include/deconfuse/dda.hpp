#ifndef DECONFUSE_DDA_HPP_
#define DECONFUSE_DDA_HPP_

#include <optional>
#include <vector>

#include "deconfuse/core.hpp"

namespace deconfuse::dda {

// Detection view: stable id plus the fields the disambiguation modules read.
struct Det {
  int id = 0;
  BBox box;
  double conf = 0.0;
  std::optional<std::vector<double>> feature;
};

// Track view: predicted position for the current frame, smoothed appearance
// feature, and whether the track entered this frame unmatched.
struct TrackView {
  int id = 0;
  BBox predicted;
  std::optional<std::vector<double>> feature;
  bool lost = false;
};

// Input to the disambiguation chain: the first-stage assignment over the
// reliable partition, both partitions, and every active track.
struct Context {
  AssignmentSet assignment;  // references tracks and first-partition detections
  std::vector<Det> first;
  std::vector<Det> second;
  std::vector<TrackView> tracks;
  double kappa = 0.3;
  double gate = 0.2;  // min LocSim for pairs formed by the DDM reassignment
};

// Detection disambiguation: replace a matched reliable detection with an
// unreliable one whose LocSim margin exceeds kappa, promote the winners into
// the reliable partition, then reassign all tracks against the updated
// partition with the replacement pairs pinned. Motion cues only.
struct DdmResult {
  AssignmentSet assignment;
  std::vector<Det> first;
  std::vector<Det> second;
  std::vector<Det> promoted;
};
DdmResult ddm(const Context& ctx);

// Trajectory disambiguation: for each assignment, re-select among the
// positionally confusable unmatched tracks (plus the current one) by
// appearance distance argmin. Pairs without embeddings pass through.
AssignmentSet tdm(const Context& ctx, const AssignmentSet& p_in);

// Population std over mean of a 2x2 LocSim block; negative when the mean is
// zero (no positional evidence, block skipped).
double coefficient_of_variation(double a, double b, double c, double d);

// Association disambiguation: pairs of assignments whose 2x2 LocSim block has
// coefficient of variation below kappa are confused; confused components are
// re-matched on appearance cost, adopted only if strictly cheaper.
AssignmentSet adm(const Context& ctx, const AssignmentSet& p_in);

struct Toggles {
  bool ddm = true;
  bool tdm = true;
  bool adm = true;
};

struct Result {
  AssignmentSet assignment;
  std::vector<Det> first;
  std::vector<Det> second;
};

// DDM, then TDM, then ADM, threading the assignment and the partitions.
// All three share the context's kappa.
Result run_dda(const Context& ctx, const Toggles& toggles = {});

}  // namespace deconfuse::dda

#endif  // DECONFUSE_DDA_HPP_
