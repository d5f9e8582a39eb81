#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deconfuse/io.hpp"
#include "deconfuse/log.hpp"
#include "deconfuse/metrics.hpp"
#include "deconfuse/synth.hpp"
#include "deconfuse/tracker.hpp"

namespace {

using namespace deconfuse;

struct Options {
  std::string det_path;
  std::string emb_path;
  std::string config_path;
  std::string gt_path;
  std::string out_path;
  std::string results_path;
  std::string csv_path;
  std::string out_dir;
  std::string scenario = "crossing";
  std::string kappa_list;
  std::string components_list;
  std::uint64_t seed = 42;
  bool no_onms = false;
  bool no_ddm = false;
  bool no_tdm = false;
  bool no_adm = false;
  bool no_second = false;
  bool baseline = false;
};

TrackerConfig load_config(const Options& opt) {
  TrackerConfig cfg;
  if (!opt.config_path.empty()) cfg = io::read_config(opt.config_path);
  if (opt.baseline) {
    cfg.enable_onms = false;
    cfg.enable_ddm = false;
    cfg.enable_tdm = false;
    cfg.enable_adm = false;
  }
  if (opt.no_onms) cfg.enable_onms = false;
  if (opt.no_ddm) cfg.enable_ddm = false;
  if (opt.no_tdm) cfg.enable_tdm = false;
  if (opt.no_adm) cfg.enable_adm = false;
  if (opt.no_second) cfg.enable_second_stage = false;
  return cfg;
}

std::vector<FrameResult> run_tracker(const io::SequenceBundle& bundle,
                                     const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  for (int frame = 1; frame <= bundle.frame_count; ++frame) {
    tracker.step(bundle.frames[frame - 1], frame);
  }
  return tracker.finalize();
}

io::TrackedFrames results_to_frames(const std::vector<FrameResult>& results) {
  int max_frame = 0;
  for (const auto& r : results) max_frame = std::max(max_frame, r.frame);
  io::TrackedFrames frames(max_frame);
  for (const auto& r : results) {
    for (const auto& e : r.outputs) {
      frames[r.frame - 1].push_back(
          io::TrackedBox{r.frame, e.track_id, e.box, e.conf});
    }
  }
  return frames;
}

synth::Scenario make_scenario(const std::string& kind, std::uint64_t seed) {
  if (kind == "crossing") return synth::crossing_scenario(seed);
  if (kind == "occlusion") return synth::occlusion_scenario(seed);
  if (kind == "fragmentation") return synth::fragmentation_scenario(seed);
  throw std::runtime_error("unknown scenario kind '" + kind +
                           "' (expected crossing, occlusion, fragmentation)");
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_track(const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  TrackerConfig cfg = load_config(opt);
  cfg.validate();

  io::SequenceBundle bundle = io::read_det(opt.det_path);
  if (!opt.emb_path.empty()) {
    if (std::filesystem::exists(opt.emb_path)) {
      io::read_embeddings(opt.emb_path, bundle);
    } else {
      log::warn("embedding file '" + opt.emb_path +
                "' not found; TDM/ADM will pass assignments through");
    }
  } else if (cfg.enable_tdm || cfg.enable_adm) {
    log::warn("no embeddings provided; TDM/ADM will pass assignments through");
  }
  long n_dets = 0;
  for (const auto& f : bundle.frames) n_dets += static_cast<long>(f.size());
  log::info("loaded " + std::to_string(n_dets) + " detections across " +
            std::to_string(bundle.frame_count) + " frames from " +
            opt.det_path);

  Tracker tracker(cfg);
  for (int frame = 1; frame <= bundle.frame_count; ++frame) {
    const auto r = tracker.step(bundle.frames[frame - 1], frame);
    log::debug("frame " + std::to_string(frame) + ": " +
               std::to_string(r.outputs.size()) + " outputs");
  }
  const auto& results = tracker.finalize();
  io::write_results(opt.out_path, results);

  // Validate the written artifact before reporting success.
  const auto parsed = io::read_tracked(opt.out_path);
  std::set<int> ids;
  long boxes = 0;
  for (const auto& frame : parsed) {
    for (const auto& row : frame) {
      ids.insert(row.id);
      ++boxes;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() /
      1000.0;
  std::cout << "frames: " << bundle.frame_count << "\n"
            << "tracks created: " << tracker.tracks_created() << "\n"
            << "ids in output: " << ids.size() << "\n"
            << "boxes written: " << boxes << "\n"
            << "runtime: " << ms << " ms\n";
  return 0;
}

int cmd_eval(const Options& opt) {
  const io::TrackedFrames gt = io::read_tracked(opt.gt_path);
  const io::TrackedFrames pred = io::read_tracked(opt.results_path);
  if (pred.size() > gt.size()) {
    throw std::runtime_error("results reference frame " +
                             std::to_string(pred.size()) +
                             " beyond ground-truth range " +
                             std::to_string(gt.size()));
  }
  const auto report = metrics::evaluate(gt, pred, "seq");
  std::cout << metrics::format_table(report);
  if (!opt.csv_path.empty()) {
    std::ofstream csv(opt.csv_path, std::ios::trunc);
    if (!csv) throw std::runtime_error(opt.csv_path + ": cannot open");
    csv << metrics::format_csv(report);
  } else {
    std::cout << metrics::format_csv(report);
  }
  return 0;
}

int cmd_synth(const Options& opt) {
  const synth::Scenario scenario = make_scenario(opt.scenario, opt.seed);
  const synth::Generated gen = synth::generate(scenario);
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  io::write_tracked((dir / "gt.txt").string(), gen.gt);
  io::write_det((dir / "det.txt").string(), gen.dets);
  io::write_embeddings((dir / "emb.csv").string(), gen.dets);
  std::cout << "wrote " << (dir / "gt.txt").string() << ", "
            << (dir / "det.txt").string() << ", " << (dir / "emb.csv").string()
            << "\n";
  return 0;
}

struct AblateRow {
  std::string label;
  metrics::EvalReport report;
};

int cmd_ablate(const Options& opt) {
  TrackerConfig base_cfg = load_config(opt);
  base_cfg.validate();

  io::SequenceBundle dets;
  io::TrackedFrames gt;
  if (!opt.det_path.empty()) {
    if (opt.gt_path.empty()) {
      throw std::runtime_error("ablate: --gt is required with --det");
    }
    dets = io::read_det(opt.det_path);
    if (!opt.emb_path.empty()) io::read_embeddings(opt.emb_path, dets);
    gt = io::read_tracked(opt.gt_path);
  } else {
    const synth::Generated gen = synth::generate(make_scenario(opt.scenario, opt.seed));
    dets = gen.dets;
    gt = gen.gt;
  }

  struct Job {
    std::string label;
    TrackerConfig cfg;
  };
  std::vector<Job> jobs;

  if (!opt.kappa_list.empty()) {
    for (const auto& item : split_list(opt.kappa_list)) {
      TrackerConfig cfg = base_cfg;
      cfg.kappa = std::stod(item);
      cfg.validate();
      jobs.push_back({"kappa=" + item, cfg});
    }
  } else if (!opt.components_list.empty()) {
    const auto comps = split_list(opt.components_list);
    for (const auto& c : comps) {
      if (c != "ddm" && c != "tdm" && c != "adm" && c != "onms") {
        throw std::runtime_error("ablate: unknown component '" + c + "'");
      }
    }
    const std::size_t n = comps.size();
    for (std::size_t mask = 0; mask < (1u << n); ++mask) {
      TrackerConfig cfg = base_cfg;
      std::string label;
      for (std::size_t k = 0; k < n; ++k) {
        const bool on = (mask >> k) & 1u;
        if (comps[k] == "ddm") cfg.enable_ddm = on;
        if (comps[k] == "tdm") cfg.enable_tdm = on;
        if (comps[k] == "adm") cfg.enable_adm = on;
        if (comps[k] == "onms") cfg.enable_onms = on;
        if (on) label += (label.empty() ? "" : "+") + comps[k];
      }
      if (label.empty()) label = "none";
      jobs.push_back({label, cfg});
    }
  } else {
    throw std::runtime_error("ablate: provide --kappa or --components");
  }

  // Rows are independent; run them in parallel, emit in order.
  std::vector<std::future<metrics::EvalReport>> futures;
  futures.reserve(jobs.size());
  for (const auto& job : jobs) {
    futures.push_back(std::async(std::launch::async, [&dets, &gt, job] {
      const auto results = run_tracker(dets, job.cfg);
      const auto pred = results_to_frames(results);
      return metrics::evaluate(gt, pred, job.label);
    }));
  }

  std::string csv = "config,mota,idf1,idsw,fp,fn,gt\n";
  char buf[256];
  std::printf("%-24s %8s %8s %6s %6s %6s\n", "config", "MOTA", "IDF1", "IDSW",
              "FP", "FN");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto report = futures[i].get();
    std::snprintf(buf, sizeof(buf), "%-24s %8.4f %8.4f %6d %6d %6d\n",
                  jobs[i].label.c_str(), report.mota, report.idf1, report.idsw,
                  report.fp, report.fn);
    std::fputs(buf, stdout);
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%d,%d,%d,%d\n",
                  jobs[i].label.c_str(), report.mota, report.idf1, report.idsw,
                  report.fp, report.fn, report.gt_count);
    csv += buf;
  }
  if (!opt.csv_path.empty()) {
    std::ofstream out(opt.csv_path, std::ios::trunc);
    if (!out) throw std::runtime_error(opt.csv_path + ": cannot open");
    out << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deconfuse: decomposed-association multi-object tracker"};
  app.require_subcommand(1);
  Options opt;

  auto* track = app.add_subcommand("track", "run the tracker on a sequence");
  track->add_option("--det", opt.det_path, "MOT detection file")->required();
  track->add_option("--emb", opt.emb_path, "embedding CSV sidecar");
  track->add_option("--config", opt.config_path, "key = value config file");
  track->add_option("--out", opt.out_path, "result file to write")->required();
  track->add_flag("--no-onms", opt.no_onms, "single-threshold suppression");
  track->add_flag("--no-ddm", opt.no_ddm, "disable detection disambiguation");
  track->add_flag("--no-tdm", opt.no_tdm, "disable trajectory disambiguation");
  track->add_flag("--no-adm", opt.no_adm, "disable association disambiguation");
  track->add_flag("--no-second", opt.no_second, "disable second association");
  track->add_flag("--baseline", opt.baseline,
                  "two-stage baseline (disables DDA and ONMS)");

  auto* eval = app.add_subcommand("eval", "score results against ground truth");
  eval->add_option("--results", opt.results_path, "result file")->required();
  eval->add_option("--gt", opt.gt_path, "ground-truth file")->required();
  eval->add_option("--csv", opt.csv_path, "write the CSV report here");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic sequence");
  synth_cmd
      ->add_option("kind", opt.scenario,
                   "crossing | occlusion | fragmentation")
      ->required();
  synth_cmd->add_option("--seed", opt.seed, "scenario seed");
  synth_cmd->add_option("--out-dir", opt.out_dir, "output directory")
      ->required();

  auto* ablate = app.add_subcommand("ablate", "sweep kappa or module toggles");
  ablate->add_option("--det", opt.det_path, "MOT detection file");
  ablate->add_option("--emb", opt.emb_path, "embedding CSV sidecar");
  ablate->add_option("--gt", opt.gt_path, "ground-truth file");
  ablate->add_option("--scenario", opt.scenario,
                     "synthetic scenario when no --det is given");
  ablate->add_option("--seed", opt.seed, "scenario seed");
  ablate->add_option("--config", opt.config_path, "key = value config file");
  ablate->add_option("--kappa", opt.kappa_list,
                     "comma-separated kappa values to sweep");
  ablate->add_option("--components", opt.components_list,
                     "comma-separated modules to toggle (power set)");
  ablate->add_option("--csv", opt.csv_path, "write the CSV table here");
  ablate->add_flag("--baseline", opt.baseline,
                   "start from the two-stage baseline configuration");

  try {
    app.parse(argc, argv);
    if (track->parsed()) return cmd_track(opt);
    if (eval->parsed()) return cmd_eval(opt);
    if (synth_cmd->parsed()) return cmd_synth(opt);
    if (ablate->parsed()) return cmd_ablate(opt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
