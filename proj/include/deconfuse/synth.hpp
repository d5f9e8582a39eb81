#ifndef DECONFUSE_SYNTH_HPP_
#define DECONFUSE_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "deconfuse/io.hpp"

namespace deconfuse::synth {

// Counter-based generator: splitmix64 over a key mixed from (seed, stream).
// No global state; identical seeds give identical draws on any platform.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double gaussian();                     // standard normal, Box-Muller

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct Waypoint {
  int frame = 1;
  double cx = 0.0;
  double cy = 0.0;
};

// Piecewise-linear mover; present on frames [path.front().frame,
// path.back().frame]. Higher agent index occludes lower.
struct Agent {
  int id = 0;
  std::vector<Waypoint> path;
  double w = 60.0;
  double h = 120.0;
};

struct OcclusionModel {
  double drop_below = 0.15;  // detection dropped when visibility falls under
  double conf_decay = 0.4;   // conf = 1 - conf_decay * (1 - visibility)
};

struct Scenario {
  std::uint64_t seed = 0;
  std::string name = "scenario";
  std::vector<Agent> agents;
  int frames = 0;
  double noise = 0.0;  // detection jitter stddev (px)
  OcclusionModel occlusion;
  int embed_dim = 32;
  double embed_noise = 0.1;
  double arena_w = 1200.0;
  double arena_h = 800.0;
};

// Largest embed_noise at which identities stay separable by cosine distance
// (inter minus intra margin above 3 sigma); used by the crossing scenario.
inline constexpr double kSeparableEmbedNoise = 0.1;

double conf_from_visibility(double visibility, const OcclusionModel& model);

struct Generated {
  io::TrackedFrames gt;
  io::SequenceBundle dets;  // with embeddings attached
};

Generated generate(const Scenario& s);

// Canned stressors: two agents crossing paths; one agent fully occluded for
// a stretch then re-emerging; one agent degraded to low confidence under
// partial occlusion.
Scenario crossing_scenario(std::uint64_t seed);
Scenario occlusion_scenario(std::uint64_t seed);
Scenario fragmentation_scenario(std::uint64_t seed);

// Generic random scene for property tests.
Scenario random_scenario(std::uint64_t seed, int n_agents, int frames);

}  // namespace deconfuse::synth

#endif  // DECONFUSE_SYNTH_HPP_
