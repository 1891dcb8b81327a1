#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "f2v/cli/run_config.hpp"
#include "f2v/core/errors.hpp"
#include "f2v/model/checkpoint.hpp"
#include "f2v/scorer/scores_io.hpp"
#include "f2v/synth/synth.hpp"
#include "helpers.hpp"

using namespace f2v;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result f2v_run(const std::string& args, const std::string& env = "") {
  TempDir tmp("cliout");
  const fs::path log = tmp.path / "stdout.txt";
  const std::string cmd = "env -u F2V_CONFIG " + env + " " + F2V_BINARY + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_bytes(log);
  return r;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

// One shared tiny pipeline for the slower checks.
struct Pipeline {
  TempDir root{"pipe"};
  fs::path data = root.path / "data";
  fs::path run = root.path / "run";
  bool ok = false;
  Pipeline() {
    ok = f2v_run("--seed 3 --out " + data.string() + " synth --image-size 32").code == 0 &&
         f2v_run("--seed 3 --out " + run.string() + " train --tiny --epochs 1 --data " + data.string()).code == 0;
  }
};

Pipeline& pipeline() {
  static Pipeline p;
  return p;
}

}  // namespace

TEST_CASE("synth twice with one seed writes identical trees") {
  TempDir a("cli"), b("cli");
  const auto ra = f2v_run("--seed 4 --out " + (a.path / "d").string() + " synth --image-size 32");
  CHECK(ra.code == 0);
  CHECK(ra.out.find("manifest.json") != std::string::npos);
  CHECK(f2v_run("--seed 4 --out " + (b.path / "d").string() + " synth --image-size 32").code == 0);
  CHECK(testutil::tree(a.path) == testutil::tree(b.path));
  const auto m = read_manifest_json(a.path / "d" / "manifest.json");
  int train = 0, test = 0;
  for (const auto& c : m.clips) (c.split == Split::train ? train : test)++;
  CHECK(train == 64);
  CHECK(test == 16);
  CHECK(m.image_size == 32);
  CHECK(f2v_run("--seed 5 --out " + (a.path / "d").string() + " synth --image-size 32").code != 0);
  CHECK(f2v_run("--seed 5 --out " + (a.path / "d").string() + " synth --image-size 32 --force").code == 0);
}

TEST_CASE("usage and config errors exit with 2") {
  CHECK(f2v_run("synth").code == 2);
  CHECK(f2v_run("").code == 2);
  CHECK(f2v_run("train --beta -1 --tiny --data /nonexistent").code == 2);
  CHECK(f2v_run("--bogus synth").code == 2);
  TempDir t("cli");
  std::ofstream(t.path / "bad.yaml") << "train:\n  nonsense: 3\n";
  CHECK(f2v_run("--config " + (t.path / "bad.yaml").string() + " --out " + (t.path / "x").string() + " synth").code ==
        2);
}

TEST_CASE("config precedence: defaults < file < flags, env var names the file") {
  TempDir t("cli");
  std::ofstream(t.path / "c.yaml") << "seed: 99\nsynth:\n  image_size: 32\n";
  std::ofstream(t.path / "d.yaml") << "seed: 42\nsynth:\n  image_size: 32\n";
  const auto seed_of = [&](const std::string& dir) { return read_manifest_json(t.path / dir / "manifest.json").seed; };
  CHECK(f2v_run("--config " + (t.path / "c.yaml").string() + " --out " + (t.path / "a").string() + " synth").code == 0);
  CHECK(seed_of("a") == 99);
  CHECK(f2v_run("--config " + (t.path / "c.yaml").string() + " --seed 5 --out " + (t.path / "b").string() + " synth")
            .code == 0);
  CHECK(seed_of("b") == 5);
  const std::string env = "F2V_CONFIG=" + (t.path / "d.yaml").string();
  CHECK(f2v_run("--out " + (t.path / "c").string() + " synth", env).code == 0);
  CHECK(seed_of("c") == 42);
  CHECK(f2v_run("--config " + (t.path / "c.yaml").string() + " --out " + (t.path / "d").string() + " synth", env)
            .code == 0);
  CHECK(seed_of("d") == 99);
}

TEST_CASE("run config yaml round trip and validation") {
  RunConfig cfg = RunConfig::defaults();
  CHECK(cfg.model.image_size == 128);
  CHECK(cfg.train.batch_size == 16);
  cfg.train.epochs = 7;
  cfg.score.sg_window = 9;
  cfg.model.stage_channels = {8, 16, 32, 64};
  cfg.model.image_size = 64;
  const RunConfig back = [&] {
    RunConfig b = RunConfig::defaults();
    apply_yaml(b, to_yaml(cfg));
    return b;
  }();
  CHECK(back.train.epochs == 7);
  CHECK(back.score.sg_window == 9);
  CHECK(back.model == cfg.model);
  RunConfig bad = RunConfig::defaults();
  apply_yaml(bad, "score:\n  sg_window: 4\n");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(apply_yaml(bad, "unknown: 1\n"), ConfigError);
}

TEST_CASE("train writes a checkpoint and log, resume continues the epoch counter") {
  Pipeline& p = pipeline();
  REQUIRE(p.ok);
  CHECK(fs::exists(p.run / "last.ckpt"));
  CHECK(fs::exists(p.run / "config.yaml"));
  const std::string log1 = testutil::read_bytes(p.run / "train_log.csv");
  CHECK(log1.rfind("epoch,step,l_rec,l_tg,kl,total\n", 0) == 0);
  const fs::path resumed = p.root.path / "resumed";
  fs::create_directories(resumed);
  fs::copy_file(p.run / "train_log.csv", resumed / "train_log.csv");
  const auto r = f2v_run("--seed 3 --out " + resumed.string() + " train --epochs 2 --data " + p.data.string() +
                         " --resume " + (p.run / "last.ckpt").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("epoch   1") != std::string::npos);
  CHECK(r.out.find("epoch   0") == std::string::npos);
  CHECK(load_checkpoint(resumed / "last.ckpt").epoch == 2);
  const std::string log2 = testutil::read_bytes(resumed / "train_log.csv");
  CHECK(log2.size() > log1.size());
  CHECK(log2.find("\n1,") != std::string::npos);
}

TEST_CASE("score, eval and plot produce the report") {
  Pipeline& p = pipeline();
  REQUIRE(p.ok);
  const std::string common = "--seed 3 --out " + p.run.string();
  CHECK(f2v_run(common + " score --maps --data " + p.data.string()).code == 0);
  const auto series = read_scores_csv(p.run / "scores.csv");
  CHECK(series.size() == 16);
  CHECK(fs::exists(p.run / "novel_class_0000" / "maps" / "000001_ts01.png"));
  const auto ev = f2v_run(common + " eval --per-clip --data " + p.data.string());
  CHECK(ev.code == 0);
  CHECK(ev.out.find("auc_all") != std::string::npos);
  const auto j = read_json(p.run / "report.json");
  CHECK(j.contains("auc_all"));
  CHECK(j.at("auc_per_timestep").size() == 10);
  CHECK(j.contains("auc_per_clip_mean"));
  CHECK(fs::exists(p.run / "report.csv"));
  CHECK(fs::exists(p.run / "roc.svg"));
  CHECK(f2v_run(common + " plot --data " + p.data.string()).code == 0);
  CHECK(fs::exists(p.run / "plots" / "normal_0000.svg"));
}

TEST_CASE("score --timestep 7 reports the seventh column as raw") {
  Pipeline& p = pipeline();
  REQUIRE(p.ok);
  const fs::path out = p.root.path / "ts7";
  CHECK(f2v_run("--out " + out.string() + " score --timestep 7 --data " + p.data.string() + " --checkpoint " +
                (p.run / "last.ckpt").string())
            .code == 0);
  for (const auto& s : read_scores_csv(out / "scores.csv")) {
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.raw[i] == s.per_timestep_error[i][6]);
  }
}

TEST_CASE("eval on a single-class score set fails with an undefined metric") {
  Pipeline& p = pipeline();
  REQUIRE(p.ok);
  const fs::path out = p.root.path / "single";
  CHECK(f2v_run("--out " + out.string() + " score --data " + p.data.string() + " --checkpoint " +
                (p.run / "last.ckpt").string())
            .code == 0);
  std::vector<AnomalyScoreSeries> normal;
  for (auto& s : read_scores_csv(out / "scores.csv")) {
    if (s.clip_id.rfind("normal_", 0) == 0) normal.push_back(s);
  }
  write_scores_csv(out / "normal.csv", normal);
  const auto r = f2v_run("--out " + out.string() + " eval --data " + p.data.string() + " --scores " +
                         (out / "normal.csv").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("undefined metric") != std::string::npos);
}
