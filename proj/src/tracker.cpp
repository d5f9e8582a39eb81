#include "deconfuse/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "deconfuse/assignment.hpp"
#include "deconfuse/dda.hpp"
#include "deconfuse/onms.hpp"

namespace deconfuse {

namespace {
constexpr int kMinHits = 2;  // consecutive hits before a tentative track reports
}

void update_feature(Track& t, const std::vector<double>& f_d, double alpha) {
  if (!t.feature) {
    t.feature = f_d;
    return;
  }
  std::vector<double>& f = *t.feature;
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = alpha * f[i] + (1.0 - alpha) * f_d[i];
    norm_sq += f[i] * f[i];
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0) {
    for (double& v : f) v /= norm;
  } else {
    t.feature = f_d;
  }
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {}

FrameResult Tracker::step(const std::vector<Detection>& dets, int frame) {
  if (started_ && frame <= last_frame_) {
    throw std::invalid_argument("Tracker::step: frame " + std::to_string(frame) +
                                " not after frame " + std::to_string(last_frame_));
  }
  for (const auto& d : dets) {
    if (d.frame != frame) {
      throw std::invalid_argument("Tracker::step: detection from frame " +
                                  std::to_string(d.frame) + " passed to frame " +
                                  std::to_string(frame));
    }
  }
  const bool first_frame = !started_;
  started_ = true;
  last_frame_ = frame;

  // (1) Partition the raw detections.
  const onms::PartitionIndices part =
      cfg_.enable_onms ? onms::partition_indices(dets, cfg_)
                       : onms::partition_single_indices(dets, cfg_);

  // (2) Advance every active track, lost ones included.
  for (Track& t : tracks_) {
    t.kf = kf_predict(t.kf);
    t.predicted = state_box(t.kf);
  }

  auto make_det_view = [&](int idx) {
    dda::Det v;
    v.id = idx;
    v.box = dets[idx].box;
    v.conf = dets[idx].conf;
    v.feature = dets[idx].embedding;
    return v;
  };

  // (3) First association: reliable detections vs all active tracks.
  std::vector<dda::Det> first_v, second_v;
  first_v.reserve(part.first.size());
  second_v.reserve(part.second.size());
  for (int idx : part.first) first_v.push_back(make_det_view(idx));
  for (int idx : part.second) second_v.push_back(make_det_view(idx));

  CostMatrix stage1;
  stage1.rows.reserve(first_v.size());
  for (const auto& d : first_v) stage1.rows.push_back(d.id);
  stage1.cols.reserve(tracks_.size());
  for (const auto& t : tracks_) stage1.cols.push_back(t.id);
  stage1.cost.resize(stage1.rows.size() * stage1.cols.size());
  for (std::size_t i = 0; i < first_v.size(); ++i) {
    for (std::size_t j = 0; j < tracks_.size(); ++j) {
      const double sim = loc_sim(first_v[i].box, tracks_[j].predicted);
      stage1.at(i, j) = sim < cfg_.gate_first ? kForbidden : 1.0 - sim;
    }
  }
  AssignmentSet p = solve(stage1);

  // (4) Disambiguation chain.
  dda::Context ctx;
  ctx.assignment = std::move(p);
  ctx.first = std::move(first_v);
  ctx.second = std::move(second_v);
  ctx.kappa = cfg_.kappa;
  ctx.gate = cfg_.gate_first;
  ctx.tracks.reserve(tracks_.size());
  for (const Track& t : tracks_) {
    dda::TrackView v;
    v.id = t.id;
    v.predicted = t.predicted;
    v.feature = t.feature;
    v.lost = !ctx.assignment.has_track(t.id);
    ctx.tracks.push_back(std::move(v));
  }
  dda::Toggles toggles{cfg_.enable_ddm, cfg_.enable_tdm, cfg_.enable_adm};
  dda::Result refined = run_dda(ctx, toggles);

  std::unordered_map<int, Track*> track_by_id;
  for (Track& t : tracks_) track_by_id.emplace(t.id, &t);
  std::unordered_map<int, const Detection*> det_by_id;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    det_by_id.emplace(static_cast<int>(i), &dets[i]);
  }

  // (5) Second association: still-tracked leftovers vs unreliable detections.
  AssignmentSet stage2_matches;
  if (cfg_.enable_second_stage) {
    std::vector<int> pool;
    for (const Track& t : tracks_) {
      if (t.state == TrackState::Tracked && !refined.assignment.has_track(t.id)) {
        pool.push_back(t.id);
      }
    }
    if (!pool.empty() && !refined.second.empty()) {
      CostMatrix stage2;
      for (const auto& d : refined.second) stage2.rows.push_back(d.id);
      stage2.cols = pool;
      stage2.cost.resize(stage2.rows.size() * stage2.cols.size());
      for (std::size_t i = 0; i < refined.second.size(); ++i) {
        for (std::size_t j = 0; j < pool.size(); ++j) {
          const double sim = loc_sim(refined.second[i].box,
                                     track_by_id.at(pool[j])->predicted);
          stage2.at(i, j) = sim < cfg_.gate_second ? kForbidden : 1.0 - sim;
        }
      }
      stage2_matches = solve(stage2);
    }
  }

  // (6) Measurement updates. Feature EMA only from reliable-partition
  // matches (promoted detections included).
  FrameResult result;
  result.frame = frame;
  std::unordered_set<int> matched_tracks;

  auto apply_match = [&](int det_id, int track_id, bool reliable) {
    Track& t = *track_by_id.at(track_id);
    const Detection& d = *det_by_id.at(det_id);
    t.kf = kf_update(t.kf, d.box);
    if (reliable && d.embedding) update_feature(t, *d.embedding, cfg_.ema_alpha);
    if (t.state == TrackState::Tentative) {
      ++t.consecutive_hits;
      if (t.consecutive_hits >= kMinHits) t.state = TrackState::Tracked;
    } else {
      t.state = TrackState::Tracked;
      ++t.consecutive_hits;
    }
    t.last_update_frame = frame;
    t.history.emplace_back(frame, d.box);
    matched_tracks.insert(track_id);
    if (t.state == TrackState::Tracked) {
      result.outputs.push_back({t.id, d.box, d.conf});
    }
  };

  for (const auto& [det_id, track_id] : refined.assignment.sorted_pairs()) {
    apply_match(det_id, track_id, /*reliable=*/true);
  }
  for (const auto& [det_id, track_id] : stage2_matches.sorted_pairs()) {
    apply_match(det_id, track_id, /*reliable=*/false);
  }

  // (7) Spawn newborn tracks from unmatched reliable detections. The first
  // frame seeds directly-tracked identities from the whole reliable set.
  for (const auto& d : refined.first) {
    if (refined.assignment.has_detection(d.id)) continue;
    const Detection& raw = *det_by_id.at(d.id);
    if (!first_frame && raw.conf < cfg_.init_conf) continue;
    Track t;
    t.id = next_id_++;
    t.state = first_frame ? TrackState::Tracked : TrackState::Tentative;
    t.kf = kf_init(raw.box);
    t.predicted = state_box(t.kf);
    t.feature = raw.embedding;
    t.last_update_frame = frame;
    t.start_frame = frame;
    t.consecutive_hits = 1;
    t.history.emplace_back(frame, raw.box);
    if (t.state == TrackState::Tracked) {
      result.outputs.push_back({t.id, raw.box, raw.conf});
    }
    tracks_.push_back(std::move(t));
  }

  // (8) Lifecycle: unmatched tracked -> lost, stale lost -> removed,
  // unmatched tentatives are dropped outright.
  std::vector<Track> survivors;
  survivors.reserve(tracks_.size());
  for (Track& t : tracks_) {
    if (matched_tracks.count(t.id) != 0 || t.start_frame == frame) {
      survivors.push_back(std::move(t));
      continue;
    }
    if (t.state == TrackState::Tentative) continue;
    if (t.state == TrackState::Tracked) t.state = TrackState::Lost;
    if (frame - t.last_update_frame > cfg_.max_age) continue;  // removed
    survivors.push_back(std::move(t));
  }
  tracks_ = std::move(survivors);

  std::sort(result.outputs.begin(), result.outputs.end(),
            [](const FrameResult::Entry& a, const FrameResult::Entry& b) {
              return a.track_id < b.track_id;
            });
  results_.push_back(result);
  return result;
}

}  // namespace deconfuse
