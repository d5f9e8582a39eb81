#include "deconfuse/dda.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "deconfuse/assignment.hpp"

namespace deconfuse::dda {

namespace {

std::unordered_map<int, const Det*> index_dets(const std::vector<Det>& dets) {
  std::unordered_map<int, const Det*> m;
  for (const auto& d : dets) m.emplace(d.id, &d);
  return m;
}

std::unordered_map<int, const TrackView*> index_tracks(
    const std::vector<TrackView>& tracks) {
  std::unordered_map<int, const TrackView*> m;
  for (const auto& t : tracks) m.emplace(t.id, &t);
  return m;
}

}  // namespace

DdmResult ddm(const Context& ctx) {
  DdmResult out;
  out.first = ctx.first;
  out.second = ctx.second;

  const auto tracks = index_tracks(ctx.tracks);
  const auto firsts = index_dets(ctx.first);

  // One replacement candidate per matched pair: the LocSim-argmax over the
  // unreliable detections clearing the kappa margin.
  struct Candidate {
    int track_id;
    int det_id;
    double sim;
  };
  std::vector<Candidate> candidates;
  for (const auto& [det_id, track_id] : ctx.assignment.sorted_pairs()) {
    const Det* dj = firsts.at(det_id);
    const TrackView* tj = tracks.at(track_id);
    const double sim_orig = loc_sim(dj->box, tj->predicted);
    const Det* best = nullptr;
    double best_sim = 0.0;
    for (const auto& di : ctx.second) {
      const double sim = loc_sim(di.box, tj->predicted);
      if (sim - sim_orig > ctx.kappa) {
        if (best == nullptr || sim > best_sim ||
            (sim == best_sim && di.id < best->id)) {
          best = &di;
          best_sim = sim;
        }
      }
    }
    if (best != nullptr) candidates.push_back({track_id, best->id, best_sim});
  }

  // Several tracks may want the same unreliable detection; the higher
  // positional similarity wins, losers keep their original pair.
  std::map<int, Candidate> winner_by_det;
  for (const auto& c : candidates) {
    auto it = winner_by_det.find(c.det_id);
    if (it == winner_by_det.end() || c.sim > it->second.sim ||
        (c.sim == it->second.sim && c.track_id < it->second.track_id)) {
      winner_by_det.insert_or_assign(c.det_id, c);
    }
  }

  if (winner_by_det.empty()) {
    out.assignment = ctx.assignment;
    return out;
  }

  // Move the winning unreliable detections into the reliable partition.
  AssignmentSet pinned;
  for (const auto& [det_id, c] : winner_by_det) {
    auto it = std::find_if(out.second.begin(), out.second.end(),
                           [&](const Det& d) { return d.id == det_id; });
    out.promoted.push_back(*it);
    out.first.push_back(*it);
    out.second.erase(it);
    pinned.add(c.det_id, c.track_id);
  }

  // Reassign every track against the updated reliable partition, honoring
  // the replacement pairs. Freed reliable detections may re-match here.
  CostMatrix m;
  m.rows.reserve(out.first.size());
  for (const auto& d : out.first) m.rows.push_back(d.id);
  m.cols.reserve(ctx.tracks.size());
  for (const auto& t : ctx.tracks) m.cols.push_back(t.id);
  m.cost.resize(m.rows.size() * m.cols.size());
  for (std::size_t i = 0; i < out.first.size(); ++i) {
    for (std::size_t j = 0; j < ctx.tracks.size(); ++j) {
      const double sim = loc_sim(out.first[i].box, ctx.tracks[j].predicted);
      m.at(i, j) = sim < ctx.gate ? kForbidden : 1.0 - sim;
    }
  }
  out.assignment = solve_pinned(m, pinned);
  return out;
}

AssignmentSet tdm(const Context& ctx, const AssignmentSet& p_in) {
  const auto tracks = index_tracks(ctx.tracks);
  const auto firsts = index_dets(ctx.first);

  struct Choice {
    int det_id;
    int original_track;
    int best_track;
    double dist;   // cos_dist to the chosen track
    bool eligible;  // false -> pass through unchanged
  };
  std::vector<Choice> choices;

  for (const auto& [det_id, track_id] : p_in.sorted_pairs()) {
    const Det* dj = firsts.at(det_id);
    const TrackView* tj = tracks.at(track_id);
    Choice ch{det_id, track_id, track_id, 0.0, false};
    if (dj->feature && tj->feature) {
      const double sim_orig = loc_sim(dj->box, tj->predicted);
      ch.eligible = true;
      ch.dist = cos_dist(*dj->feature, *tj->feature);
      for (const auto& ti : ctx.tracks) {
        if (ti.id == track_id || p_in.has_track(ti.id)) continue;
        if (!ti.feature) continue;
        if (sim_orig - loc_sim(dj->box, ti.predicted) >= ctx.kappa) continue;
        const double dist = cos_dist(*dj->feature, *ti.feature);
        if (dist < ch.dist || (dist == ch.dist && ch.best_track != track_id &&
                               ti.id < ch.best_track)) {
          ch.best_track = ti.id;
          ch.dist = dist;
        }
      }
    }
    choices.push_back(ch);
  }

  // A track chosen by several detections keeps the smaller cosine distance.
  std::map<int, const Choice*> winner_by_track;
  for (const auto& ch : choices) {
    if (!ch.eligible) continue;
    auto it = winner_by_track.find(ch.best_track);
    if (it == winner_by_track.end() || ch.dist < it->second->dist ||
        (ch.dist == it->second->dist && ch.det_id < it->second->det_id)) {
      winner_by_track.insert_or_assign(ch.best_track, &ch);
    }
  }

  AssignmentSet out;
  for (const auto& ch : choices) {
    if (!ch.eligible) {
      out.add(ch.det_id, ch.original_track);
      continue;
    }
    auto it = winner_by_track.find(ch.best_track);
    if (it->second == &ch) {
      out.add(ch.det_id, ch.best_track);
      continue;
    }
    // Conflict loser: fall back to the original track unless some winner
    // claimed it, in which case the detection ends unmatched.
    auto claimed = winner_by_track.find(ch.original_track);
    if (claimed != winner_by_track.end() && claimed->second != &ch) continue;
    out.add(ch.det_id, ch.original_track);
  }
  return out;
}

double coefficient_of_variation(double a, double b, double c, double d) {
  const double mean = (a + b + c + d) / 4.0;
  if (mean <= 0.0) return -1.0;
  double var = 0.0;
  for (double v : {a, b, c, d}) var += (v - mean) * (v - mean);
  return std::sqrt(var / 4.0) / mean;
}

AssignmentSet adm(const Context& ctx, const AssignmentSet& p_in) {
  const auto tracks = index_tracks(ctx.tracks);
  const auto firsts = index_dets(ctx.first);

  const auto pairs = p_in.sorted_pairs();
  const int n = static_cast<int>(pairs.size());

  std::vector<const Det*> det_of(n);
  std::vector<const TrackView*> track_of(n);
  std::vector<bool> eligible(n);
  for (int k = 0; k < n; ++k) {
    det_of[k] = firsts.at(pairs[k].first);
    track_of[k] = tracks.at(pairs[k].second);
    eligible[k] = det_of[k]->feature.has_value() &&
                  track_of[k]->feature.has_value();
  }

  // Union-find over assignments linked by a confused pair.
  std::vector<int> parent(n);
  for (int k = 0; k < n; ++k) parent[k] = k;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  bool any_confused = false;
  for (int i = 0; i < n; ++i) {
    if (!eligible[i]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (!eligible[j]) continue;
      const double cv = coefficient_of_variation(
          loc_sim(det_of[i]->box, track_of[i]->predicted),
          loc_sim(det_of[i]->box, track_of[j]->predicted),
          loc_sim(det_of[j]->box, track_of[i]->predicted),
          loc_sim(det_of[j]->box, track_of[j]->predicted));
      if (cv >= 0.0 && cv < ctx.kappa) {
        parent[find(i)] = find(j);
        any_confused = true;
      }
    }
  }
  if (!any_confused) return p_in;

  std::map<int, std::vector<int>> components;
  for (int k = 0; k < n; ++k) components[find(k)].push_back(k);

  AssignmentSet out;
  for (const auto& [root, members] : components) {
    if (members.size() < 2) {
      const int k = members.front();
      out.add(pairs[k].first, pairs[k].second);
      continue;
    }
    // Appearance-cost rematch within the component; keep the original pairs
    // unless the rematch is strictly cheaper.
    const int sz = static_cast<int>(members.size());
    CostMatrix m;
    for (int k : members) m.rows.push_back(pairs[k].first);
    for (int k : members) m.cols.push_back(pairs[k].second);
    m.cost.resize(static_cast<std::size_t>(sz) * sz);
    double straight_cost = 0.0;
    for (int a = 0; a < sz; ++a) {
      for (int b = 0; b < sz; ++b) {
        const double d = cos_dist(*det_of[members[a]]->feature,
                                  *track_of[members[b]]->feature);
        // cos_dist spans [0,2]; halve to satisfy the [0,1] entry contract.
        m.at(a, b) = 0.5 * d;
        if (a == b) straight_cost += d;
      }
    }
    const AssignmentSet rematch = solve(m);
    double rematch_cost = 0.0;
    for (const auto& [det_id, track_id] : rematch.pairs()) {
      rematch_cost += cos_dist(*firsts.at(det_id)->feature,
                               *tracks.at(track_id)->feature);
    }
    const AssignmentSet* chosen = &rematch;
    AssignmentSet straight;
    if (!(rematch_cost < straight_cost)) {
      for (int k : members) straight.add(pairs[k].first, pairs[k].second);
      chosen = &straight;
    }
    for (const auto& [det_id, track_id] : chosen->sorted_pairs()) {
      out.add(det_id, track_id);
    }
  }
  return out;
}

Result run_dda(const Context& ctx, const Toggles& toggles) {
  Context cur = ctx;
  if (toggles.ddm) {
    DdmResult r = ddm(cur);
    cur.assignment = std::move(r.assignment);
    cur.first = std::move(r.first);
    cur.second = std::move(r.second);
  }
  if (toggles.tdm) cur.assignment = tdm(cur, cur.assignment);
  if (toggles.adm) cur.assignment = adm(cur, cur.assignment);
  return Result{std::move(cur.assignment), std::move(cur.first),
                std::move(cur.second)};
}

}  // namespace deconfuse::dda
