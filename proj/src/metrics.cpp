#include "deconfuse/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "deconfuse/assignment.hpp"

namespace deconfuse::metrics {

FrameMatch ClearMatcher::match_frame(const std::vector<TrackedBox>& gt,
                                     const std::vector<TrackedBox>& pred) {
  FrameMatch out;

  std::map<int, const TrackedBox*> gt_by_id, pred_by_id;
  for (const auto& g : gt) gt_by_id.emplace(g.id, &g);
  for (const auto& p : pred) pred_by_id.emplace(p.id, &p);

  std::set<int> taken_pred;
  std::set<int> matched_gt;

  // Persistence pass: keep last frame's correspondence while it still holds.
  for (const auto& [gid, gbox] : gt_by_id) {
    auto it = last_match_.find(gid);
    if (it == last_match_.end()) continue;
    auto pit = pred_by_id.find(it->second);
    if (pit == pred_by_id.end()) continue;
    if (taken_pred.count(pit->first) != 0) continue;
    if (iou(gbox->box, pit->second->box) < iou_threshold_) continue;
    out.matches.emplace_back(gid, pit->first);
    matched_gt.insert(gid);
    taken_pred.insert(pit->first);
  }

  // Hungarian over the leftovers, gated at the IoU threshold.
  std::vector<const TrackedBox*> rem_gt, rem_pred;
  for (const auto& [gid, gbox] : gt_by_id) {
    if (matched_gt.count(gid) == 0) rem_gt.push_back(gbox);
  }
  for (const auto& [pid, pbox] : pred_by_id) {
    if (taken_pred.count(pid) == 0) rem_pred.push_back(pbox);
  }
  if (!rem_gt.empty() && !rem_pred.empty()) {
    CostMatrix m;
    for (const auto* g : rem_gt) m.rows.push_back(g->id);
    for (const auto* p : rem_pred) m.cols.push_back(p->id);
    m.cost.resize(rem_gt.size() * rem_pred.size());
    for (std::size_t i = 0; i < rem_gt.size(); ++i) {
      for (std::size_t j = 0; j < rem_pred.size(); ++j) {
        const double v = iou(rem_gt[i]->box, rem_pred[j]->box);
        m.at(i, j) = v < iou_threshold_ ? kForbidden : 1.0 - v;
      }
    }
    for (const auto& [gid, pid] : solve(m).sorted_pairs()) {
      out.matches.emplace_back(gid, pid);
      matched_gt.insert(gid);
      taken_pred.insert(pid);
    }
  }

  // Switches: the matched prediction id changed since the ground truth's
  // last matched frame.
  std::sort(out.matches.begin(), out.matches.end());
  for (const auto& [gid, pid] : out.matches) {
    auto it = last_match_.find(gid);
    if (it != last_match_.end() && it->second != pid) ++out.idsw;
    last_match_[gid] = pid;
  }

  out.fn = static_cast<int>(gt.size() - matched_gt.size());
  out.fp = static_cast<int>(pred.size() - taken_pred.size());
  return out;
}

ClearCounts clear_metrics(const TrackedFrames& gt, const TrackedFrames& pred,
                          double iou_threshold) {
  ClearMatcher matcher(iou_threshold);
  ClearCounts counts;
  const std::size_t frames = std::max(gt.size(), pred.size());
  static const std::vector<TrackedBox> kEmpty;
  for (std::size_t f = 0; f < frames; ++f) {
    const auto& g = f < gt.size() ? gt[f] : kEmpty;
    const auto& p = f < pred.size() ? pred[f] : kEmpty;
    const FrameMatch m = matcher.match_frame(g, p);
    counts.fp += m.fp;
    counts.fn += m.fn;
    counts.idsw += m.idsw;
    counts.gt_count += static_cast<int>(g.size());
    counts.matches += static_cast<int>(m.matches.size());
  }
  return counts;
}

IdCounts idf1_counts(const TrackedFrames& gt, const TrackedFrames& pred,
                     double iou_threshold) {
  // Per identity-pair overlap: frames where both are present and the boxes
  // clear the threshold.
  std::map<std::pair<int, int>, long> overlap;
  std::set<int> gt_ids, pred_ids;
  long total_gt = 0, total_pred = 0;

  const std::size_t frames = std::max(gt.size(), pred.size());
  for (std::size_t f = 0; f < frames; ++f) {
    if (f < gt.size()) {
      total_gt += static_cast<long>(gt[f].size());
      for (const auto& g : gt[f]) gt_ids.insert(g.id);
    }
    if (f < pred.size()) {
      total_pred += static_cast<long>(pred[f].size());
      for (const auto& p : pred[f]) pred_ids.insert(p.id);
    }
    if (f >= gt.size() || f >= pred.size()) continue;
    for (const auto& g : gt[f]) {
      for (const auto& p : pred[f]) {
        if (iou(g.box, p.box) >= iou_threshold) ++overlap[{g.id, p.id}];
      }
    }
  }

  IdCounts counts;
  if (!gt_ids.empty() && !pred_ids.empty() && !overlap.empty()) {
    std::vector<int> gvec(gt_ids.begin(), gt_ids.end());
    std::vector<int> pvec(pred_ids.begin(), pred_ids.end());
    long max_ov = 0;
    for (const auto& [key, v] : overlap) max_ov = std::max(max_ov, v);

    CostMatrix m;
    m.rows = gvec;
    m.cols = pvec;
    m.cost.resize(gvec.size() * pvec.size());
    for (std::size_t i = 0; i < gvec.size(); ++i) {
      for (std::size_t j = 0; j < pvec.size(); ++j) {
        auto it = overlap.find({gvec[i], pvec[j]});
        const long ov = it == overlap.end() ? 0 : it->second;
        m.at(i, j) = 1.0 - static_cast<double>(ov) / static_cast<double>(max_ov);
      }
    }
    long idtp = 0;
    for (const auto& [gid, pid] : solve(m).sorted_pairs()) {
      auto it = overlap.find({gid, pid});
      if (it != overlap.end()) idtp += it->second;
    }
    counts.idtp = idtp;
  }
  counts.idfp = total_pred - counts.idtp;
  counts.idfn = total_gt - counts.idtp;
  return counts;
}

double idf1(const TrackedFrames& gt, const TrackedFrames& pred,
            double iou_threshold) {
  const IdCounts c = idf1_counts(gt, pred, iou_threshold);
  const long denom = 2 * c.idtp + c.idfp + c.idfn;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(c.idtp) / static_cast<double>(denom);
}

namespace {

SequenceReport make_sequence_report(const std::string& name,
                                    const TrackedFrames& gt,
                                    const TrackedFrames& pred,
                                    double iou_threshold, ClearCounts* counts,
                                    IdCounts* ids) {
  const ClearCounts c = clear_metrics(gt, pred, iou_threshold);
  if (c.gt_count == 0) {
    throw std::invalid_argument("evaluate: ground truth is empty");
  }
  const IdCounts id = idf1_counts(gt, pred, iou_threshold);
  SequenceReport r;
  r.name = name;
  r.fp = c.fp;
  r.fn = c.fn;
  r.idsw = c.idsw;
  r.gt_count = c.gt_count;
  r.mota = 1.0 - static_cast<double>(c.fp + c.fn + c.idsw) /
                     static_cast<double>(c.gt_count);
  const long denom = 2 * id.idtp + id.idfp + id.idfn;
  r.idf1 = denom == 0 ? 0.0
                      : 2.0 * static_cast<double>(id.idtp) /
                            static_cast<double>(denom);
  if (counts != nullptr) *counts = c;
  if (ids != nullptr) *ids = id;
  return r;
}

}  // namespace

EvalReport evaluate(const TrackedFrames& gt, const TrackedFrames& pred,
                    const std::string& name, double iou_threshold) {
  EvalReport report;
  const SequenceReport seq =
      make_sequence_report(name, gt, pred, iou_threshold, nullptr, nullptr);
  report.mota = seq.mota;
  report.idf1 = seq.idf1;
  report.idsw = seq.idsw;
  report.fp = seq.fp;
  report.fn = seq.fn;
  report.gt_count = seq.gt_count;
  report.per_sequence.push_back(seq);
  return report;
}

EvalReport evaluate_many(
    const std::vector<std::pair<std::string,
                                std::pair<const TrackedFrames*,
                                          const TrackedFrames*>>>& sequences,
    double iou_threshold) {
  EvalReport report;
  long fp = 0, fn = 0, idsw = 0, gt_count = 0;
  IdCounts pooled;
  for (const auto& [name, pair] : sequences) {
    ClearCounts c;
    IdCounts id;
    const SequenceReport seq = make_sequence_report(
        name, *pair.first, *pair.second, iou_threshold, &c, &id);
    report.per_sequence.push_back(seq);
    fp += c.fp;
    fn += c.fn;
    idsw += c.idsw;
    gt_count += c.gt_count;
    pooled.idtp += id.idtp;
    pooled.idfp += id.idfp;
    pooled.idfn += id.idfn;
  }
  if (gt_count == 0) {
    throw std::invalid_argument("evaluate_many: ground truth is empty");
  }
  report.fp = static_cast<int>(fp);
  report.fn = static_cast<int>(fn);
  report.idsw = static_cast<int>(idsw);
  report.gt_count = static_cast<int>(gt_count);
  report.mota =
      1.0 - static_cast<double>(fp + fn + idsw) / static_cast<double>(gt_count);
  const long denom = 2 * pooled.idtp + pooled.idfp + pooled.idfn;
  report.idf1 = denom == 0 ? 0.0
                           : 2.0 * static_cast<double>(pooled.idtp) /
                                 static_cast<double>(denom);
  return report;
}

std::string format_table(const EvalReport& report) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %6s %6s %6s %8s\n", "sequence",
                "MOTA", "IDF1", "IDSW", "FP", "FN", "GT");
  out += buf;
  for (const auto& s : report.per_sequence) {
    std::snprintf(buf, sizeof(buf), "%-16s %8.4f %8.4f %6d %6d %6d %8d\n",
                  s.name.c_str(), s.mota, s.idf1, s.idsw, s.fp, s.fn,
                  s.gt_count);
    out += buf;
  }
  if (report.per_sequence.size() > 1) {
    std::snprintf(buf, sizeof(buf), "%-16s %8.4f %8.4f %6d %6d %6d %8d\n",
                  "OVERALL", report.mota, report.idf1, report.idsw, report.fp,
                  report.fn, report.gt_count);
    out += buf;
  }
  return out;
}

std::string format_csv(const EvalReport& report) {
  std::string out = "sequence,mota,idf1,idsw,fp,fn,gt\n";
  char buf[256];
  for (const auto& s : report.per_sequence) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%d,%d,%d,%d\n",
                  s.name.c_str(), s.mota, s.idf1, s.idsw, s.fp, s.fn,
                  s.gt_count);
    out += buf;
  }
  return out;
}

}  // namespace deconfuse::metrics
