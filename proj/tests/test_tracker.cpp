#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "deconfuse/assignment.hpp"
#include "deconfuse/metrics.hpp"
#include "deconfuse/onms.hpp"
#include "deconfuse/synth.hpp"
#include "deconfuse/tracker.hpp"
#include "oracles.hpp"

using namespace deconfuse;

namespace {

Detection det(int frame, BBox box, double conf,
              std::optional<std::vector<double>> emb = {}) {
  Detection d;
  d.frame = frame;
  d.box = box;
  d.conf = conf;
  d.embedding = std::move(emb);
  return d;
}

// Test-local reduction reference: single-threshold suppression, two BYTE
// association stages, same lifecycle rules. Written independently of the
// Tracker class so the pipeline equivalence check is a real cross-check.
class ByteReference {
 public:
  explicit ByteReference(TrackerConfig cfg) : cfg_(std::move(cfg)) {}

  FrameResult step(const std::vector<Detection>& dets, int frame) {
    const bool first_frame = !started_;
    started_ = true;

    // Two confidence bands under one suppression threshold.
    std::vector<int> first_idx, second_idx;
    const auto scores = onms::suppression_scores(dets);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (scores[i].u > cfg_.nms_first) continue;
      if (dets[i].conf >= cfg_.conf_first) first_idx.push_back((int)i);
      else if (dets[i].conf >= cfg_.conf_second) second_idx.push_back((int)i);
    }

    for (auto& t : tracks_) {
      t.kf = kf_predict(t.kf);
      t.predicted = state_box(t.kf);
    }

    auto associate = [&](const std::vector<int>& det_idx,
                         const std::vector<int>& track_ids, double gate) {
      CostMatrix m;
      m.rows = det_idx;
      m.cols = track_ids;
      m.cost.resize(det_idx.size() * track_ids.size());
      for (std::size_t i = 0; i < det_idx.size(); ++i) {
        for (std::size_t j = 0; j < track_ids.size(); ++j) {
          const double sim =
              iou(dets[det_idx[i]].box, by_id(track_ids[j]).predicted);
          m.at(i, j) = sim < gate ? kForbidden : 1.0 - sim;
        }
      }
      return solve(m);
    };

    std::vector<int> all_ids;
    for (const auto& t : tracks_) all_ids.push_back(t.id);
    const AssignmentSet p1 = associate(first_idx, all_ids, cfg_.gate_first);

    std::vector<int> pool2;
    for (const auto& t : tracks_) {
      if (t.state == TrackState::Tracked && !p1.has_track(t.id)) {
        pool2.push_back(t.id);
      }
    }
    AssignmentSet p2;
    if (!pool2.empty() && !second_idx.empty()) {
      p2 = associate(second_idx, pool2, cfg_.gate_second);
    }

    FrameResult result;
    result.frame = frame;
    std::set<int> matched;
    auto hit = [&](int det_id, int track_id) {
      auto& t = by_id(track_id);
      t.kf = kf_update(t.kf, dets[det_id].box);
      if (t.state == TrackState::Tentative) {
        if (++t.hits >= 2) t.state = TrackState::Tracked;
      } else {
        t.state = TrackState::Tracked;
      }
      t.last_update = frame;
      matched.insert(track_id);
      if (t.state == TrackState::Tracked) {
        result.outputs.push_back({t.id, dets[det_id].box, dets[det_id].conf});
      }
    };
    for (const auto& [d, t] : p1.sorted_pairs()) hit(d, t);
    for (const auto& [d, t] : p2.sorted_pairs()) hit(d, t);

    for (int idx : first_idx) {
      if (p1.has_detection(idx)) continue;
      if (!first_frame && dets[idx].conf < cfg_.init_conf) continue;
      Ref t;
      t.id = next_id_++;
      t.state = first_frame ? TrackState::Tracked : TrackState::Tentative;
      t.kf = kf_init(dets[idx].box);
      t.predicted = state_box(t.kf);
      t.last_update = frame;
      t.born = frame;
      t.hits = 1;
      if (t.state == TrackState::Tracked) {
        result.outputs.push_back({t.id, dets[idx].box, dets[idx].conf});
      }
      tracks_.push_back(t);
    }

    std::vector<Ref> keep;
    for (auto& t : tracks_) {
      if (matched.count(t.id) != 0 || t.born == frame) {
        keep.push_back(t);
        continue;
      }
      if (t.state == TrackState::Tentative) continue;
      if (t.state == TrackState::Tracked) t.state = TrackState::Lost;
      if (frame - t.last_update > cfg_.max_age) continue;
      keep.push_back(t);
    }
    tracks_ = keep;

    std::sort(result.outputs.begin(), result.outputs.end(),
              [](const FrameResult::Entry& a, const FrameResult::Entry& b) {
                return a.track_id < b.track_id;
              });
    return result;
  }

 private:
  struct Ref {
    int id;
    TrackState state;
    KalmanState kf;
    BBox predicted;
    int last_update = 0;
    int born = 0;
    int hits = 0;
  };
  Ref& by_id(int id) {
    for (auto& t : tracks_) {
      if (t.id == id) return t;
    }
    throw std::logic_error("unknown id");
  }
  TrackerConfig cfg_;
  std::vector<Ref> tracks_;
  int next_id_ = 1;
  bool started_ = false;
};

TrackerConfig baseline_config() {
  TrackerConfig cfg;
  cfg.enable_onms = false;
  cfg.enable_ddm = false;
  cfg.enable_tdm = false;
  cfg.enable_adm = false;
  return cfg;
}

}  // namespace

TEST_SUITE("tracker") {

TEST_CASE("first frame initializes tracked identities from reliable boxes") {
  Tracker tracker(TrackerConfig{});
  const auto r = tracker.step({det(1, BBox{50, 50, 20, 40}, 0.9),
                               det(1, BBox{300, 300, 20, 40}, 0.95)},
                              1);
  REQUIRE(r.outputs.size() == 2);
  CHECK(r.outputs[0].track_id != r.outputs[1].track_id);
  CHECK(tracker.tracks_created() == 2);
}

TEST_CASE("noiseless constant-velocity target: one stable, accurate track") {
  Tracker tracker(TrackerConfig{});
  std::set<int> ids;
  for (int frame = 1; frame <= 20; ++frame) {
    const BBox truth{100.0 + 4.0 * (frame - 1), 200.0 - 2.0 * (frame - 1), 30,
                     60};
    const auto r = tracker.step({det(frame, truth, 0.95)}, frame);
    REQUIRE(r.outputs.size() == 1);
    ids.insert(r.outputs[0].track_id);
    if (frame > 3) {
      const BBox& b = r.outputs[0].box;
      CHECK(std::abs(b.cx - truth.cx) < 1e-3);
      CHECK(std::abs(b.cy - truth.cy) < 1e-3);
      CHECK(std::abs(b.w - truth.w) < 1e-3);
      CHECK(std::abs(b.h - truth.h) < 1e-3);
    }
  }
  CHECK(ids.size() == 1);  // zero identity switches
}

TEST_CASE("update_feature follows the smoothing rule") {
  Track t;
  SUBCASE("first observation sets the feature") {
    update_feature(t, {1.0, 0.0}, 0.9);
    REQUIRE(t.feature.has_value());
    CHECK((*t.feature)[0] == doctest::Approx(1.0));
  }
  SUBCASE("alpha = 1 keeps the feature unchanged") {
    t.feature = std::vector<double>{0.0, 1.0};
    update_feature(t, {1.0, 0.0}, 1.0);
    CHECK((*t.feature)[0] == doctest::Approx(0.0));
    CHECK((*t.feature)[1] == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal blend renormalizes: dot = 0.1/sqrt(0.82)") {
    t.feature = std::vector<double>{0.0, 1.0};
    const std::vector<double> f_d{1.0, 0.0};
    update_feature(t, f_d, 0.9);
    const double dot = (*t.feature)[0];
    CHECK(dot == doctest::Approx(0.1 / std::sqrt(0.82)).epsilon(1e-9));
    double norm = 0.0;
    for (double v : *t.feature) norm += v * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("finalize returns per-frame results") {
  SUBCASE("empty video") {
    Tracker tracker(TrackerConfig{});
    CHECK(tracker.finalize().empty());
  }
  SUBCASE("persistent target keeps one id across all frames") {
    Tracker tracker(TrackerConfig{});
    for (int frame = 1; frame <= 10; ++frame) {
      tracker.step({det(frame, BBox{50.0 + frame, 80, 20, 40}, 0.9)}, frame);
    }
    const auto& results = tracker.finalize();
    REQUIRE(results.size() == 10);
    const int id = results[0].outputs.at(0).track_id;
    for (const auto& r : results) {
      REQUIRE(r.outputs.size() == 1);
      CHECK(r.outputs[0].track_id == id);
    }
  }
  SUBCASE("a track seen for one frame never reaches the output") {
    Tracker tracker(TrackerConfig{});
    // Seed an established track on frame 1, then a one-frame newcomer.
    tracker.step({det(1, BBox{50, 50, 20, 40}, 0.9)}, 1);
    const auto r2 = tracker.step({det(2, BBox{51, 50, 20, 40}, 0.9),
                                  det(2, BBox{400, 400, 20, 40}, 0.9)},
                                 2);
    CHECK(r2.outputs.size() == 1);  // newcomer is tentative, not reported
    const auto r3 =
        tracker.step({det(3, BBox{52, 50, 20, 40}, 0.9)}, 3);
    CHECK(r3.outputs.size() == 1);
    for (const auto& r : tracker.finalize()) {
      for (const auto& e : r.outputs) CHECK(e.track_id == 1);
    }
  }
}

TEST_CASE("tentative track confirms on its second consecutive hit") {
  Tracker tracker(TrackerConfig{});
  tracker.step({det(1, BBox{50, 50, 20, 40}, 0.9)}, 1);
  const auto r2 = tracker.step({det(2, BBox{51, 50, 20, 40}, 0.9),
                                det(2, BBox{400, 400, 20, 40}, 0.9)},
                               2);
  CHECK(r2.outputs.size() == 1);
  const auto r3 = tracker.step({det(3, BBox{52, 50, 20, 40}, 0.9),
                                det(3, BBox{401, 400, 20, 40}, 0.9)},
                               3);
  CHECK(r3.outputs.size() == 2);  // confirmed on the second hit
}

TEST_CASE("frames must increase and detections must match the frame") {
  Tracker tracker(TrackerConfig{});
  tracker.step({det(1, BBox{50, 50, 20, 40}, 0.9)}, 1);
  CHECK_THROWS_AS(tracker.step({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(tracker.step({det(1, BBox{0, 0, 2, 2}, 0.9)}, 2),
                  std::invalid_argument);
}

TEST_CASE("lost tracks beyond max_age never reappear") {
  TrackerConfig cfg;
  cfg.max_age = 3;
  Tracker tracker(cfg);
  tracker.step({det(1, BBox{50, 50, 20, 40}, 0.9)}, 1);
  for (int frame = 2; frame <= 6; ++frame) tracker.step({}, frame);
  // Same place again, well past max_age: must be a fresh identity.
  const auto r = tracker.step({det(7, BBox{50, 50, 20, 40}, 0.9)}, 7);
  REQUIRE(r.outputs.empty());  // newborn is tentative on a non-first frame
  const auto r8 = tracker.step({det(8, BBox{50, 50, 20, 40}, 0.9)}, 8);
  REQUIRE(r8.outputs.size() == 1);
  CHECK(r8.outputs[0].track_id != 1);
}

TEST_CASE("a lost track within max_age is re-found with its old id") {
  Tracker tracker(TrackerConfig{});
  tracker.step({det(1, BBox{50, 50, 20, 40}, 0.9)}, 1);
  tracker.step({det(2, BBox{54, 50, 20, 40}, 0.9)}, 2);
  for (int frame = 3; frame <= 5; ++frame) tracker.step({}, frame);
  const auto r = tracker.step({det(6, BBox{70, 50, 20, 40}, 0.9)}, 6);
  REQUIRE(r.outputs.size() == 1);
  CHECK(r.outputs[0].track_id == 1);
}

TEST_CASE("ids are unique per frame and never reused") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Tracker tracker(TrackerConfig{});
    const auto gen = synth::generate(synth::random_scenario(seed, 5, 40));
    std::set<int> seen;
    int newest = 0;
    for (int frame = 1; frame <= 40; ++frame) {
      const auto r = tracker.step(gen.dets.frames[frame - 1], frame);
      std::set<int> frame_ids;
      for (const auto& e : r.outputs) {
        CHECK(frame_ids.insert(e.track_id).second);
        // A first appearance must carry a fresher id than everything before.
        if (seen.insert(e.track_id).second) {
          CHECK(e.track_id > newest);
          newest = e.track_id;
        }
      }
    }
  }
}

TEST_CASE("crossing targets: appearance-aware run preserves the identities") {
  // Find the switch with the motion-only baseline and its absence with the
  // full configuration, judged against the generator's ground truth.
  int baseline_switches = 0;
  int full_switches = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto gen = synth::generate(synth::crossing_scenario(seed));
    for (const bool use_dda : {false, true}) {
      TrackerConfig cfg = use_dda ? TrackerConfig{} : baseline_config();
      Tracker tracker(cfg);
      io::TrackedFrames pred(gen.dets.frames.size());
      for (std::size_t f = 0; f < gen.dets.frames.size(); ++f) {
        const auto r = tracker.step(gen.dets.frames[f], (int)f + 1);
        for (const auto& e : r.outputs) {
          pred[f].push_back(io::TrackedBox{(int)f + 1, e.track_id, e.box, e.conf});
        }
      }
      const auto counts = metrics::clear_metrics(gen.gt, pred);
      (use_dda ? full_switches : baseline_switches) += counts.idsw;
    }
  }
  CHECK(full_switches < baseline_switches);
}

TEST_CASE("pipeline with everything disabled equals the reduction reference") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto gen = synth::generate(synth::random_scenario(seed, 4, 30));
    Tracker tracker(baseline_config());
    ByteReference reference(baseline_config());
    for (int frame = 1; frame <= 30; ++frame) {
      // Strip embeddings so both paths are purely motion-driven.
      auto dets = gen.dets.frames[frame - 1];
      for (auto& d : dets) d.embedding.reset();
      const FrameResult a = tracker.step(dets, frame);
      const FrameResult b = reference.step(dets, frame);
      REQUIRE(a.outputs.size() == b.outputs.size());
      for (std::size_t k = 0; k < a.outputs.size(); ++k) {
        CHECK(a.outputs[k].track_id == b.outputs[k].track_id);
        CHECK(a.outputs[k].box.cx ==
              doctest::Approx(b.outputs[k].box.cx).epsilon(1e-12));
        CHECK(a.outputs[k].box.cy ==
              doctest::Approx(b.outputs[k].box.cy).epsilon(1e-12));
        CHECK(a.outputs[k].conf == b.outputs[k].conf);
      }
    }
  }
}

TEST_CASE("independent tracker instances run safely in parallel") {
  // One instance per sequence on separate threads must reproduce the
  // serial results exactly (no hidden shared state).
  std::vector<synth::Generated> scenes;
  for (std::uint64_t seed = 70; seed < 74; ++seed) {
    scenes.push_back(synth::generate(synth::random_scenario(seed, 4, 30)));
  }
  auto run = [](const synth::Generated& gen) {
    Tracker tracker{TrackerConfig{}};
    for (int frame = 1; frame <= 30; ++frame) {
      tracker.step(gen.dets.frames[frame - 1], frame);
    }
    return tracker.finalize();
  };
  std::vector<std::vector<FrameResult>> serial;
  for (const auto& gen : scenes) serial.push_back(run(gen));

  std::vector<std::vector<FrameResult>> parallel(scenes.size());
  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    workers.emplace_back([&, k] { parallel[k] = run(scenes[k]); });
  }
  for (auto& w : workers) w.join();

  for (std::size_t k = 0; k < scenes.size(); ++k) {
    REQUIRE(parallel[k].size() == serial[k].size());
    for (std::size_t f = 0; f < serial[k].size(); ++f) {
      REQUIRE(parallel[k][f].outputs.size() == serial[k][f].outputs.size());
      for (std::size_t i = 0; i < serial[k][f].outputs.size(); ++i) {
        CHECK(parallel[k][f].outputs[i].track_id ==
              serial[k][f].outputs[i].track_id);
        CHECK(parallel[k][f].outputs[i].box.cx == serial[k][f].outputs[i].box.cx);
      }
    }
  }
}

TEST_CASE("step is deterministic for identical inputs") {
  for (std::uint64_t seed = 60; seed <= 65; ++seed) {
    const auto gen = synth::generate(synth::random_scenario(seed, 4, 25));
    Tracker a{TrackerConfig{}}, b{TrackerConfig{}};
    for (int frame = 1; frame <= 25; ++frame) {
      const auto ra = a.step(gen.dets.frames[frame - 1], frame);
      const auto rb = b.step(gen.dets.frames[frame - 1], frame);
      REQUIRE(ra.outputs.size() == rb.outputs.size());
      for (std::size_t k = 0; k < ra.outputs.size(); ++k) {
        CHECK(ra.outputs[k].track_id == rb.outputs[k].track_id);
        CHECK(ra.outputs[k].box.cx == rb.outputs[k].box.cx);
      }
    }
  }
}

}  // TEST_SUITE
