#include "deconfuse/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace deconfuse::io {

namespace {

[[noreturn]] void fail(const std::string& path, long line,
                       const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Locale-independent numeric parse (decimal point only).
double parse_double(std::string_view raw, const std::string& path, long line) {
  const std::string_view s = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(path, line, "malformed number '" + std::string(raw) + "'");
  }
  return value;
}

long parse_long(std::string_view raw, const std::string& path, long line) {
  const std::string_view s = trim(raw);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(path, line, "malformed integer '" + std::string(raw) + "'");
  }
  return value;
}

struct MotRow {
  int frame;
  int id;
  BBox box;
  double conf;
  long line;
};

std::vector<MotRow> read_mot_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  std::vector<MotRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() < 7) fail(path, line_no, "expected at least 7 fields");
    MotRow row;
    row.frame = static_cast<int>(parse_long(fields[0], path, line_no));
    row.id = static_cast<int>(parse_long(fields[1], path, line_no));
    const double x = parse_double(fields[2], path, line_no);
    const double y = parse_double(fields[3], path, line_no);
    const double w = parse_double(fields[4], path, line_no);
    const double h = parse_double(fields[5], path, line_no);
    row.conf = parse_double(fields[6], path, line_no);
    if (row.frame < 1) fail(path, line_no, "frame index must be >= 1");
    if (row.frame > 10'000'000) fail(path, line_no, "implausible frame index");
    if (!(w > 0.0) || !(h > 0.0)) fail(path, line_no, "non-positive box extent");
    if (!std::isfinite(x) || !std::isfinite(y)) fail(path, line_no, "non-finite coordinate");
    if (!(row.conf >= 0.0 && row.conf <= 1.0)) {
      fail(path, line_no, "confidence outside [0,1]");
    }
    row.box = tlwh_to_center(x, y, w, h);
    row.line = line_no;
    rows.push_back(row);
  }
  return rows;
}

// Atomic text write: temp file in the target directory, then rename.
void write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(path + ": write failed");
  }
  fs::rename(tmp, target);
}

}  // namespace

SequenceBundle read_det(const std::string& path) {
  const auto rows = read_mot_rows(path);
  SequenceBundle bundle;
  bundle.name = std::filesystem::path(path).stem().string();
  for (const auto& row : rows) {
    bundle.frame_count = std::max(bundle.frame_count, row.frame);
  }
  bundle.frames.resize(bundle.frame_count);
  for (const auto& row : rows) {
    Detection d;
    d.frame = row.frame;
    d.box = row.box;
    d.conf = row.conf;
    d.source_line = row.line;
    bundle.frames[row.frame - 1].push_back(std::move(d));
  }
  return bundle;
}

void read_embeddings(const std::string& path, SequenceBundle& bundle) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");

  std::vector<std::vector<double>> vectors;
  std::string line;
  long line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    std::vector<double> v(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      v[i] = parse_double(fields[i], path, line_no);
    }
    if (dim == 0) {
      dim = v.size();
    } else if (v.size() != dim) {
      fail(path, line_no, "embedding dimension changed from " +
                              std::to_string(dim) + " to " +
                              std::to_string(v.size()));
    }
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      fail(path, line_no, "embedding has zero or non-finite norm");
    }
    for (double& x : v) x /= norm;
    vectors.push_back(std::move(v));
  }

  // Row k belongs to the k-th detection line of the detection file.
  std::vector<Detection*> in_file_order;
  for (auto& frame : bundle.frames) {
    for (auto& d : frame) in_file_order.push_back(&d);
  }
  std::sort(in_file_order.begin(), in_file_order.end(),
            [](const Detection* a, const Detection* b) {
              return a->source_line < b->source_line;
            });
  if (vectors.size() != in_file_order.size()) {
    throw std::runtime_error(path + ": " + std::to_string(vectors.size()) +
                             " embedding rows for " +
                             std::to_string(in_file_order.size()) +
                             " detections");
  }
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    in_file_order[k]->embedding = std::move(vectors[k]);
  }
  bundle.has_embeddings = !in_file_order.empty();
}

TrackedFrames read_tracked(const std::string& path) {
  const auto rows = read_mot_rows(path);
  int frame_count = 0;
  for (const auto& row : rows) frame_count = std::max(frame_count, row.frame);
  TrackedFrames frames(frame_count);
  std::set<std::pair<int, int>> seen;
  for (const auto& row : rows) {
    if (!seen.insert({row.frame, row.id}).second) {
      fail(path, row.line,
           "duplicate id " + std::to_string(row.id) + " in frame " +
               std::to_string(row.frame));
    }
    frames[row.frame - 1].push_back(
        TrackedBox{row.frame, row.id, row.box, row.conf});
  }
  return frames;
}

namespace {

void append_row(std::string& out, int frame, int id, const BBox& box,
                double conf) {
  const Tlwh t = center_to_tlwh(box);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n",
                frame, id, t.x, t.y, t.w, t.h, conf);
  out += buf;
}

}  // namespace

void write_results(const std::string& path,
                   const std::vector<FrameResult>& results) {
  std::vector<const FrameResult*> ordered;
  ordered.reserve(results.size());
  for (const auto& r : results) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const FrameResult* a, const FrameResult* b) {
              return a->frame < b->frame;
            });
  std::string out;
  for (const FrameResult* r : ordered) {
    auto entries = r->outputs;
    std::sort(entries.begin(), entries.end(),
              [](const FrameResult::Entry& a, const FrameResult::Entry& b) {
                return a.track_id < b.track_id;
              });
    for (const auto& e : entries) {
      append_row(out, r->frame, e.track_id, e.box, e.conf);
    }
  }
  write_text(path, out);
}

void write_tracked(const std::string& path, const TrackedFrames& frames) {
  std::string out;
  for (const auto& frame : frames) {
    auto rows = frame;
    std::sort(rows.begin(), rows.end(),
              [](const TrackedBox& a, const TrackedBox& b) {
                return a.id < b.id;
              });
    for (const auto& r : rows) append_row(out, r.frame, r.id, r.box, r.conf);
  }
  write_text(path, out);
}

void write_det(const std::string& path, const SequenceBundle& bundle) {
  std::string out;
  for (const auto& frame : bundle.frames) {
    for (const auto& d : frame) append_row(out, d.frame, -1, d.box, d.conf);
  }
  write_text(path, out);
}

void write_embeddings(const std::string& path, const SequenceBundle& bundle) {
  std::vector<const Detection*> in_file_order;
  for (const auto& frame : bundle.frames) {
    for (const auto& d : frame) in_file_order.push_back(&d);
  }
  std::sort(in_file_order.begin(), in_file_order.end(),
            [](const Detection* a, const Detection* b) {
              return a->source_line < b->source_line;
            });
  std::string out;
  char buf[32];
  for (const Detection* d : in_file_order) {
    if (!d->embedding) {
      throw std::runtime_error(path + ": detection without embedding");
    }
    const auto& v = *d->embedding;
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g", v[i]);
      if (i != 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  write_text(path, out);
}

TrackerConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  TrackerConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) fail(path, line_no, "expected key = value");
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));

    if (key == "max_age") {
      cfg.max_age = static_cast<int>(parse_long(value, path, line_no));
      continue;
    }
    const double v = parse_double(value, path, line_no);
    if (key == "kappa") cfg.kappa = v;
    else if (key == "conf_first") cfg.conf_first = v;
    else if (key == "conf_second") cfg.conf_second = v;
    else if (key == "nms_first") cfg.nms_first = v;
    else if (key == "nms_second") cfg.nms_second = v;
    else if (key == "gate_first") cfg.gate_first = v;
    else if (key == "gate_second") cfg.gate_second = v;
    else if (key == "init_conf") cfg.init_conf = v;
    else if (key == "ema_alpha") cfg.ema_alpha = v;
    else fail(path, line_no, "unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace deconfuse::io
