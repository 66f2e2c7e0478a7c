#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "seld/error.hpp"
#include "seld/track_io.hpp"
#include "seld/wav.hpp"

namespace fs = std::filesystem;
using seld::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "seld");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("seld_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    spit(dir_ / "one.json", R"({"duration_s": 4, "seed": 3, "events": [
      {"class_id": 4, "kind": "noise-burst", "onset_s": 0.5, "offset_s": 3.5, "azimuth_deg": 100, "elevation_deg": -20}]})");
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FullPipelineIsDeterministic) {
  auto r = run({"synth", p("one.json"), "-o", p("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(p("a/one.wav")));
  ASSERT_TRUE(fs::exists(p("a/one_gt.csv")));
  ASSERT_EQ(run({"synth", p("one.json"), "-o", p("b")}).code, 0);
  EXPECT_EQ(slurp(p("a/one.wav")), slurp(p("b/one.wav")));
  EXPECT_EQ(slurp(p("a/one_gt.csv")), slurp(p("b/one_gt.csv")));

  r = run({"analyze", p("a/one.wav"), "-o", p("doa.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run({"analyze", p("a/one.wav"), "-o", p("doa2.csv")}).code, 0);
  EXPECT_EQ(slurp(p("doa.csv")), slurp(p("doa2.csv")));
  const auto doa = seld::read_doa_csv(fs::path(p("doa.csv")));
  std::size_t rows = 0;
  for (const auto& f : doa.frames) {
    for (const auto& d : f) {
      ++rows;
      EXPECT_EQ(d, seld::SphericalDirection(100.0, -20.0));
    }
  }
  EXPECT_GE(rows, 150u);
  EXPECT_NE(slurp(p("doa.csv")).find("peak_threshold_ratio=0.01"), std::string::npos);

  r = run({"fuse", "--doa", p("doa.csv"), "--oracle", p("a/one_gt.csv"), "-o", p("fused.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"eval", p("fused.csv"), p("a/one_gt.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "{\"sed_error_rate\": 0, \"sed_f1\": 100, \"doa_error\": 0, \"frame_recall\": 100}\n");
  r = run({"eval", p("fused.csv"), p("a/one_gt.csv"), "--format", "csv"});
  EXPECT_EQ(r.out, "sed_error_rate,sed_f1,doa_error,frame_recall\n0,100,0,100\n");
}

TEST_F(Cli, MusicAndHistogramDumps) {
  ASSERT_EQ(run({"synth", p("one.json"), "-o", p("s")}).code, 0);
  auto r = run({"analyze", p("s/one.wav"), "--music", "-o", p("music.csv"), "--dump-histograms", p("dump")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto music = slurp(p("music.csv"));
  EXPECT_NE(music.find("method=music"), std::string::npos);
  EXPECT_NE(music.find(",100,-20,"), std::string::npos);
  bool any_music = false;
  for (const auto& e : fs::directory_iterator(p("dump")))
    any_music = any_music || e.path().filename().string().find("_music.pgm") != std::string::npos;
  EXPECT_TRUE(any_music);

  r = run({"analyze", p("s/one.wav"), "-o", p("h.csv"), "--dump-histograms", p("hd")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t raw = 0, smooth = 0;
  for (const auto& e : fs::directory_iterator(p("hd"))) {
    const auto n = e.path().filename().string();
    raw += n.find("_raw.csv") != std::string::npos;
    smooth += n.find("_smoothed.pgm") != std::string::npos;
  }
  EXPECT_GT(raw, 0u);
  EXPECT_EQ(raw, smooth);
}

TEST_F(Cli, SilenceGivesEmptyBody) {
  seld::write_wav(seld::AudioClip::silent(4, 48000, 48000.0), fs::path(p("silence.wav")));
  auto r = run({"analyze", p("silence.wav")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 2u);  // provenance comment + header
  EXPECT_NE(r.out.find("frame_index,azimuth_deg,elevation_deg,score\n"), std::string::npos);
}

TEST_F(Cli, EmptyEstimateScoresZero) {
  ASSERT_EQ(run({"synth", p("one.json"), "-o", p("s")}).code, 0);
  spit(p("empty.csv"), "# frame_count=200 hop_s=0.02\nframe_index,class_id,azimuth_deg,elevation_deg\n");
  const auto r = run({"eval", p("empty.csv"), p("s/one_gt.csv"), "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "sed_error_rate,sed_f1,doa_error,frame_recall\n1,0,180,0\n");
}

TEST_F(Cli, CompareAnechoicSingleSource) {
  auto r = run({"compare", "--spec", p("one.json"), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"histogram\": {\n      \"doa_error\": 0.0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"music\": {\n      \"doa_error\": 0.0"), std::string::npos) << r.out;
  ASSERT_EQ(run({"synth", p("one.json"), "-o", p("s")}).code, 0);
  r = run({"compare", "--wav", p("s/one.wav"), "--gt", p("s/one_gt.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean"), std::string::npos);
}

TEST_F(Cli, ErrorsExitNonzeroWithOneLine) {
  spit(p("bad.json"), R"({"duration_s": 2, "events": [{"class_id": 0, "onset_s": 1, "offset_s": 0.5, "azimuth_deg": 0, "elevation_deg": 0}]})");
  auto r = run({"synth", p("bad.json"), "-o", p("x")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(count_lines(r.err), 1u) << r.err;

  ASSERT_EQ(run({"synth", p("one.json"), "-o", p("s")}).code, 0);
  r = run({"compare", "--wav", p("s/one.wav")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(count_lines(r.err), 1u);
  r = run({"compare", "--wav", p("s/one.wav"), "--gt", p("missing.csv")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(count_lines(r.err), 1u);

  r = run({"analyze", p("nope.wav")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(count_lines(r.err), 1u);
  r = run({"frobnicate"});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(count_lines(r.err), 1u);
  r = run({"fuse", "--doa", p("s/one_gt.csv")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(count_lines(r.err), 1u);
}

TEST_F(Cli, ConfigFileAndFlagOverrides) {
  ASSERT_EQ(run({"synth", p("one.json"), "-o", p("s")}).code, 0);
  spit(p("cfg.json"), R"({"coherence_rho": 0.95, "frame_window": 3, "grid": {"resolution": 20}})");
  auto r = run({"--config", p("cfg.json"), "analyze", p("s/one.wav"), "--frame-window", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("coherence_rho=0.95"), std::string::npos);
  EXPECT_NE(r.out.find("frame_window=5"), std::string::npos);
  EXPECT_NE(r.out.find("@20"), std::string::npos);
  EXPECT_NE(r.out.find(",100,-20,"), std::string::npos);

  spit(p("typo.json"), R"({"coherence_roh": 0.95})");
  r = run({"--config", p("typo.json"), "analyze", p("s/one.wav")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("coherence_roh"), std::string::npos);
  r = run({"analyze", p("s/one.wav"), "--rho", "0.1"});
  EXPECT_NE(r.code, 0);
}

TEST_F(Cli, SeedOverrideChangesSynthesis) {
  ASSERT_EQ(run({"--seed", "1", "synth", p("one.json"), "-o", p("a")}).code, 0);
  ASSERT_EQ(run({"--seed", "2", "synth", p("one.json"), "-o", p("b")}).code, 0);
  EXPECT_NE(slurp(p("a/one.wav")), slurp(p("b/one.wav")));
}

TEST_F(Cli, FuseWithDetectionsFile) {
  ASSERT_EQ(run({"synth", p("one.json"), "-o", p("s")}).code, 0);
  ASSERT_EQ(run({"analyze", p("s/one.wav"), "-o", p("doa.csv")}).code, 0);
  spit(p("det.csv"), "frame_index,class_id,probability\n60,4,0.9\n61,4,0.4\n");
  const auto r = run({"fuse", "--doa", p("doa.csv"), "--detections", p("det.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n60,4,100,-20\n"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("\n61,"), std::string::npos);
}
