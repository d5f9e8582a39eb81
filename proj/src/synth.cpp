#include "deconfuse/synth.hpp"

#include <algorithm>
#include <cmath>

namespace deconfuse::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  return splitmix64(s);
}

BBox agent_box(const Agent& a, int frame) {
  const auto& path = a.path;
  double cx = path.back().cx, cy = path.back().cy;
  if (frame <= path.front().frame) {
    cx = path.front().cx;
    cy = path.front().cy;
  } else {
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const Waypoint& p = path[k];
      const Waypoint& q = path[k + 1];
      if (frame > q.frame || q.frame <= p.frame) continue;
      const double t = static_cast<double>(frame - p.frame) /
                       static_cast<double>(q.frame - p.frame);
      cx = p.cx + t * (q.cx - p.cx);
      cy = p.cy + t * (q.cy - p.cy);
      break;
    }
  }
  return BBox{cx, cy, a.w, a.h};
}

bool agent_present(const Agent& a, int frame) {
  return frame >= a.path.front().frame && frame <= a.path.back().frame;
}

std::vector<double> identity_embedding(const Scenario& s, int agent_id) {
  CounterRng rng(s.seed, 0x1000 + static_cast<std::uint64_t>(agent_id));
  std::vector<double> v(s.embed_dim);
  double norm_sq = 0.0;
  for (double& x : v) {
    x = rng.gaussian();
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix_key(seed, stream)) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(state_); }

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double CounterRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double conf_from_visibility(double visibility, const OcclusionModel& model) {
  const double c = 1.0 - model.conf_decay * (1.0 - visibility);
  return std::clamp(c, 0.0, 1.0);
}

Generated generate(const Scenario& s) {
  Generated out;
  out.gt.resize(s.frames);
  out.dets.name = s.name;
  out.dets.frame_count = s.frames;
  out.dets.frames.resize(s.frames);

  CounterRng rng(s.seed, 0);
  std::vector<std::vector<double>> bases;
  bases.reserve(s.agents.size());
  for (const auto& a : s.agents) bases.push_back(identity_embedding(s, a.id));

  long emitted = 0;
  for (int frame = 1; frame <= s.frames; ++frame) {
    std::vector<BBox> boxes(s.agents.size());
    std::vector<bool> present(s.agents.size());
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      present[i] = agent_present(s.agents[i], frame);
      if (present[i]) boxes[i] = agent_box(s.agents[i], frame);
    }

    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      if (!present[i]) continue;
      out.gt[frame - 1].push_back(
          io::TrackedBox{frame, s.agents[i].id, boxes[i], 1.0});

      // Painter's order: agents later in the list occlude earlier ones.
      double max_iou = 0.0;
      for (std::size_t j = i + 1; j < s.agents.size(); ++j) {
        if (present[j]) max_iou = std::max(max_iou, iou(boxes[i], boxes[j]));
      }
      const double visibility = 1.0 - max_iou;
      if (visibility < s.occlusion.drop_below) continue;

      Detection d;
      d.frame = frame;
      d.conf = conf_from_visibility(visibility, s.occlusion);
      BBox b = boxes[i];
      if (s.noise > 0.0) {
        b.cx += s.noise * rng.gaussian();
        b.cy += s.noise * rng.gaussian();
        b.w = std::max(2.0, b.w + 0.25 * s.noise * rng.gaussian());
        b.h = std::max(2.0, b.h + 0.25 * s.noise * rng.gaussian());
      }
      d.box = b;
      d.source_line = ++emitted;

      std::vector<double> emb = bases[i];
      if (s.embed_noise > 0.0) {
        double norm_sq = 0.0;
        for (double& x : emb) {
          x += s.embed_noise * rng.gaussian();
          norm_sq += x * x;
        }
        const double norm = std::sqrt(norm_sq);
        for (double& x : emb) x /= norm;
      }
      d.embedding = std::move(emb);
      out.dets.frames[frame - 1].push_back(std::move(d));
    }
  }
  out.dets.has_embeddings = emitted > 0;
  return out;
}

Scenario crossing_scenario(std::uint64_t seed) {
  CounterRng rng(seed, 0xc05);
  Scenario s;
  s.seed = seed;
  s.name = "crossing";
  s.frames = 76;
  s.arena_w = 1280.0;
  s.noise = 2.5;
  s.embed_dim = 32;
  s.embed_noise = kSeparableEmbedNoise;
  // Gentle decay keeps heavily-overlapped boxes confident; only a sliver of
  // full occlusion drops them entirely.
  s.occlusion = OcclusionModel{0.05, 0.35};

  // Slow overtake whose paths cross vertically at the midpoint frame: for
  // several frames the two predicted positions are nearly interchangeable,
  // and the overtaken agent is heavily overlapped while still confident.
  const double y0 = rng.uniform(300.0, 440.0);
  const double speed = rng.uniform(10.5, 12.0);
  const double catchup = rng.uniform(1.6, 2.4);
  const double dx0 = rng.uniform(55.0, 75.0);
  const double dy0 = rng.uniform(6.0, 12.0);
  const double side = rng.uniform(0.0, 1.0) < 0.5 ? 1.0 : -1.0;
  const int last = s.frames;

  Agent walker;
  walker.id = 1;
  walker.w = 60.0;
  walker.h = 120.0;
  walker.path = {{1, 170.0, y0}, {last, 170.0 + (last - 1) * speed, y0}};

  // Overtaker starts behind and below (or above), drifts through the
  // walker's line as it passes.
  // Vertical line crossed exactly at the overtake frame, so the two paths
  // genuinely intersect there.
  const int t_cross = 1 + static_cast<int>(dx0 / catchup);
  Agent overtaker;
  overtaker.id = 2;
  overtaker.w = 60.0;
  overtaker.h = 120.0;
  const double ob_x0 = 170.0 - dx0;
  const double ob_speed = speed + catchup;
  const double dy_rate = dy0 / std::max(1, t_cross - 1);
  overtaker.path = {
      {1, ob_x0, y0 + side * dy0},
      {last, ob_x0 + (last - 1) * ob_speed,
       y0 + side * (dy0 - (last - 1) * dy_rate)}};

  s.agents = {walker, overtaker};
  return s;
}

Scenario occlusion_scenario(std::uint64_t seed) {
  CounterRng rng(seed, 0x0cc);
  Scenario s;
  s.seed = seed;
  s.name = "occlusion";
  s.frames = 70;
  s.noise = 1.5;
  s.embed_dim = 32;
  s.embed_noise = kSeparableEmbedNoise;
  s.occlusion = OcclusionModel{0.15, 0.4};

  // Walker overtaken by a same-size occluder that shadows it for a stretch
  // (k fully-hidden frames) before peeling away. The approach and exit
  // produce confident but heavily-overlapped detections.
  const double y = rng.uniform(330.0, 430.0);
  const double gap = rng.uniform(2.0, 5.0);
  const int hold = 8 + static_cast<int>(rng.uniform(0.0, 5.0));  // k in [8,12]
  const double speed = rng.uniform(11.0, 15.0);

  Agent walker;
  walker.id = 1;
  walker.w = 60.0;
  walker.h = 120.0;
  walker.path = {{1, 120.0, y}, {70, 120.0 + 69.0 * speed, y}};

  auto walker_x = [&](int frame) { return 120.0 + (frame - 1) * speed; };

  // Shadow converges from above, rides at a small vertical gap, then leaves.
  const int t_meet = 25;
  const int t_release = t_meet + hold;
  Agent shadow;
  shadow.id = 2;
  shadow.w = 60.0;
  shadow.h = 120.0;
  shadow.path = {{5, walker_x(5), y - 260.0},
                 {t_meet, walker_x(t_meet), y + gap},
                 {t_release, walker_x(t_release), y + gap},
                 {t_release + 14, walker_x(t_release + 14), y + 300.0}};

  s.agents = {walker, shadow};
  return s;
}

Scenario fragmentation_scenario(std::uint64_t seed) {
  CounterRng rng(seed, 0xf4a);
  Scenario s;
  s.seed = seed;
  s.name = "fragmentation";
  s.frames = 60;
  s.noise = 1.5;
  s.embed_dim = 32;
  s.embed_noise = kSeparableEmbedNoise;
  // Aggressive decay: partially occluded boxes fall into the unreliable band.
  s.occlusion = OcclusionModel{0.05, 1.0};

  const double y = rng.uniform(350.0, 420.0);
  const double speed = rng.uniform(6.0, 9.0);

  // Walker passes behind a static blocker offset by a fifth of a box height,
  // so overlap peaks near IoU 0.65 and confidence dips to ~0.35 without the
  // detection being dropped.
  Agent walker;
  walker.id = 1;
  walker.w = 60.0;
  walker.h = 120.0;
  walker.path = {{1, 140.0, y}, {60, 140.0 + 59.0 * speed, y}};

  Agent blocker;
  blocker.id = 2;
  blocker.w = 60.0;
  blocker.h = 120.0;
  blocker.path = {{1, 140.0 + 29.0 * speed, y + 25.0},
                  {60, 140.0 + 29.0 * speed, y + 25.0}};

  s.agents = {walker, blocker};
  return s;
}

Scenario random_scenario(std::uint64_t seed, int n_agents, int frames) {
  CounterRng rng(seed, 0x5ce);
  Scenario s;
  s.seed = seed;
  s.name = "random";
  s.frames = frames;
  s.noise = 2.0;
  s.embed_dim = 16;
  s.embed_noise = kSeparableEmbedNoise;
  s.occlusion = OcclusionModel{0.15, 0.4};

  for (int i = 0; i < n_agents; ++i) {
    Agent a;
    a.id = i + 1;
    a.w = rng.uniform(40.0, 80.0);
    a.h = rng.uniform(90.0, 160.0);
    const double margin_x = a.w;
    const double margin_y = a.h;
    const double x0 = rng.uniform(margin_x, s.arena_w - margin_x);
    const double y0 = rng.uniform(margin_y, s.arena_h - margin_y);
    const double x1 = rng.uniform(margin_x, s.arena_w - margin_x);
    const double y1 = rng.uniform(margin_y, s.arena_h - margin_y);
    const int enter = 1 + static_cast<int>(rng.uniform(0.0, frames / 4.0));
    const int leave =
        frames - static_cast<int>(rng.uniform(0.0, frames / 4.0));
    a.path = {{enter, x0, y0}, {std::max(enter + 1, leave), x1, y1}};
    s.agents.push_back(std::move(a));
  }
  return s;
}

}  // namespace deconfuse::synth
