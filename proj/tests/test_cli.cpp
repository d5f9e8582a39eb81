#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef DECONFUSE_CLI_PATH
#define DECONFUSE_CLI_PATH ""
#endif

namespace {

namespace fs = std::filesystem;

const std::string kCli = DECONFUSE_CLI_PATH;

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "deconfuse_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& stdout_to = {}) {
  std::string cmd = kCli + " " + args;
  cmd += stdout_to.empty() ? " > /dev/null" : " > " + stdout_to.string();
  cmd += " 2> /dev/null";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("individual toggles reproduce the baseline shorthand") {
  const fs::path dir = work_dir();
  REQUIRE(run("synth crossing --seed 21 --out-dir " + (dir / "seq").string()) == 0);
  const std::string det = (dir / "seq" / "det.txt").string();
  const std::string emb = (dir / "seq" / "emb.csv").string();
  REQUIRE(run("track --det " + det + " --emb " + emb +
              " --no-tdm --no-adm --no-ddm --no-onms --out " +
              (dir / "toggles.txt").string()) == 0);
  REQUIRE(run("track --det " + det + " --emb " + emb + " --baseline --out " +
              (dir / "baseline.txt").string()) == 0);
  CHECK(slurp(dir / "toggles.txt") == slurp(dir / "baseline.txt"));
  CHECK(!slurp(dir / "baseline.txt").empty());
}

TEST_CASE("eval of a result against itself reports perfect scores") {
  const fs::path dir = work_dir();
  REQUIRE(run("synth occlusion --seed 4 --out-dir " + (dir / "seq2").string()) == 0);
  const std::string gt = (dir / "seq2" / "gt.txt").string();
  const fs::path csv = dir / "self.csv";
  REQUIRE(run("eval --results " + gt + " --gt " + gt + " --csv " + csv.string()) == 0);
  const std::string report = slurp(csv);
  CHECK(report.find("1.000000,1.000000,0,0,0") != std::string::npos);
}

TEST_CASE("eval of empty results reports MOTA <= 0") {
  const fs::path dir = work_dir();
  REQUIRE(run("synth occlusion --seed 4 --out-dir " + (dir / "seq3").string()) == 0);
  const fs::path empty = dir / "empty.txt";
  std::ofstream(empty).close();
  const fs::path csv = dir / "empty.csv";
  REQUIRE(run("eval --results " + empty.string() + " --gt " +
              (dir / "seq3" / "gt.txt").string() + " --csv " + csv.string()) == 0);
  // sequence,mota,... -- mota is the second field of the data row.
  std::istringstream in(slurp(csv));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  const std::size_t comma = row.find(',');
  REQUIRE(comma != std::string::npos);
  CHECK(std::stod(row.substr(comma + 1)) <= 0.0);
}

TEST_CASE("results beyond the ground-truth frame range are rejected") {
  const fs::path dir = work_dir();
  const fs::path gt = dir / "short_gt.txt";
  const fs::path res = dir / "long_res.txt";
  std::ofstream(gt) << "1,1,10,10,5,5,1,-1,-1,-1\n";
  std::ofstream(res) << "2,1,10,10,5,5,1,-1,-1,-1\n";
  CHECK(run("eval --results " + res.string() + " --gt " + gt.string()) != 0);
}

TEST_CASE("unknown scenario kind exits nonzero") {
  const fs::path dir = work_dir();
  CHECK(run("synth nonsense --seed 1 --out-dir " + (dir / "x").string()) != 0);
}

TEST_CASE("config file values are honored") {
  const fs::path dir = work_dir();
  const fs::path good = dir / "good.cfg";
  std::ofstream(good) << "kappa = 0.4\nmax_age = 10\n";
  REQUIRE(run("synth crossing --seed 5 --out-dir " + (dir / "seq4").string()) == 0);
  CHECK(run("track --det " + (dir / "seq4" / "det.txt").string() +
            " --config " + good.string() + " --out " +
            (dir / "cfg_run.txt").string()) == 0);

  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "nms_second = 0.2\n";
  CHECK(run("track --det " + (dir / "seq4" / "det.txt").string() +
            " --config " + bad.string() + " --out " +
            (dir / "bad_run.txt").string()) != 0);
}

}  // TEST_SUITE
