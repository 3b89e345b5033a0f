#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "dhnet/cli.hpp"
#include "dhnet/encoder.hpp"
#include "dhnet/error.hpp"
#include "dhnet/plot.hpp"
#include "dhnet/synth.hpp"
#include "support.hpp"

namespace dhnet {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json last_json_line(const std::string& text) {
  const auto end = text.find_last_not_of('\n');
  const auto start = text.rfind('\n', end);
  return json::parse(text.substr(start == std::string::npos ? 0 : start + 1, end + 1));
}

// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) ::setenv(name_, old_->c_str(), 1);
    else ::unsetenv(name_);
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(ExitCodes, OnePerKind) {
  EXPECT_EQ(exit_code_for("invalid_argument"), 1);
  EXPECT_EQ(exit_code_for("io_error"), 2);
  EXPECT_EQ(exit_code_for("missing_tool"), 3);
  EXPECT_EQ(exit_code_for("parse_error"), 4);
  EXPECT_EQ(exit_code_for("incompatible_artifact"), 5);
  EXPECT_EQ(exit_code_for("training_abort"), 6);
  EXPECT_EQ(exit_code_for("undefined_metrics"), 7);
  EXPECT_EQ(exit_code_for("external_tool_failed"), 8);
  EXPECT_EQ(exit_code_for("something_else"), 9);
}

TEST(Cli, UsageErrorsAreStructured) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"bogus"}, {"synth"}, {"detect", "--model", "m", "--frames", "f", "--q-s", "3", "--mode", "nonsense"}}) {
    const CliRun r = cli(args);
    EXPECT_EQ(r.code, kExitInvalidArgument);
    const json e = json::parse(r.err);
    EXPECT_EQ(e["error"]["kind"], "usage");
    EXPECT_TRUE(e["error"]["message"].is_string());
  }
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, ErrorKindsMapToExitCodes) {
  test::TempDir dir("cli");
  // Missing input file.
  CliRun r = cli({"extract", "--manifest", (dir / "none.jsonl").string(), "--out", (dir / "f.dhf1").string()});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "io_error");
  // Malformed manifest.
  test::spit(dir / "bad.jsonl", "{\"path\": 3}\n");
  r = cli({"extract", "--manifest", (dir / "bad.jsonl").string(), "--out", (dir / "f.dhf1").string()});
  EXPECT_EQ(r.code, kExitParse);
  // Invalid q pair.
  r = cli({"synth", "--out", (dir / "s").string(), "--n", "2", "--pairs", "3:3"});
  EXPECT_EQ(r.code, kExitInvalidArgument);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "invalid_argument");
}

TEST(Cli, SynthIsDeterministic) {
  test::TempDir a("synA"), b("synB");
  for (const auto* d : {&a, &b}) {
    const CliRun r = cli({"synth", "--out", d->path().string(), "--n", "10", "--seed", "7", "--width", "32", "--height", "32"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(last_json_line(r.out)["planes"], 10);
  }
  EXPECT_EQ(test::slurp(a / "manifest.jsonl"), test::slurp(b / "manifest.jsonl"));
  EXPECT_EQ(test::slurp(a / "planes/plane_00009.pgm"), test::slurp(b / "planes/plane_00009.pgm"));
}

TEST(Cli, FlagBeatsConfigBeatsDefault) {
  test::TempDir dir("prec");
  test::spit(dir / "c.toml", "[synth]\nn = 6\nheight = 32\n");
  const std::string cfg = (dir / "c.toml").string();
  // n: flag over config.
  CliRun r = cli({"synth", "--config", cfg, "--out", (dir / "a").string(), "--n", "4", "--width", "32"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(last_json_line(r.out)["planes"], 4);
  // n: config over default; height from config; width from the default.
  r = cli({"synth", "--config", cfg, "--out", (dir / "b").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(last_json_line(r.out)["planes"], 6);
  const YPlane p = read_pgm(dir / "b/planes/plane_00000.pgm");
  EXPECT_EQ(p.height(), 32);
  EXPECT_EQ(p.width(), 256);
  // height: flag over config.
  r = cli({"--config", cfg, "synth", "--out", (dir / "c").string(), "--n", "2", "--height", "48"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_pgm(dir / "c/planes/plane_00000.pgm").height(), 48);
}

TEST(Encoder, GoldenArguments) {
  EncoderJob job;
  job.input = "in.y4m";
  job.output = "out.avi";
  job.q_s = 3;
  job.gop_size = 6;
  EXPECT_EQ(encode_arguments(job),
            (std::vector<std::string>{"-y", "-hide_banner", "-loglevel", "error", "-i", "in.y4m", "-c:v", "libxvid",
                                      "-qscale:v", "3", "-g", "6", "-bf", "0", "out.avi"}));
  EXPECT_EQ(dump_arguments("out.avi", "frames"),
            (std::vector<std::string>{"-y", "-hide_banner", "-loglevel", "error", "-i", "out.avi", "-pix_fmt", "rgb24",
                                      "frames/frame_%05d.png"}));
  job.q_s = 0;
  EXPECT_THROW(encode_arguments(job), InvalidArgument);
  const CliRun r = cli({"encode", "--input", "in.y4m", "--out", "out.avi", "--print-args"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)[9], "3");
}

TEST(Encoder, MissingEncoderExitsWithThree) {
  test::TempDir dir("enc");
  test::spit(dir / "in.y4m", "x");
  ScopedEnv env(kEncoderEnv, "/nonexistent/ffmpeg");
  EXPECT_THROW(resolve_encoder(), MissingTool);
  const CliRun r = cli({"encode", "--input", (dir / "in.y4m").string(), "--out", (dir / "o.avi").string()});
  EXPECT_EQ(r.code, kExitMissingTool);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "missing_tool");
}

// A stand-in encoder: writes the output file on encode, and on dump drops
// three copies of a prepared PNG into the frame directory.
void write_fake_encoder(const fs::path& script, const fs::path& png, int exit_code) {
  test::spit(script, "#!/bin/sh\n"
                     "for last; do :; done\n"
                     "echo \"fake encoder: $*\" >&2\n"
                     "if [ " + std::to_string(exit_code) + " -ne 0 ]; then exit " + std::to_string(exit_code) + "; fi\n"
                     "case \"$last\" in\n"
                     "  *frame_%05d.png) d=$(dirname \"$last\"); for i in 00001 00002 00003; do cp '" + png.string() +
                     "' \"$d/frame_$i.png\"; done ;;\n"
                     "  *) echo video > \"$last\" ;;\n"
                     "esac\n");
  fs::permissions(script, fs::perms::owner_all);
}

TEST(Encoder, RunsExternalToolAndCollectsFrames) {
  test::TempDir dir("enc");
  RgbFrame f(16, 16, std::vector<std::uint8_t>(16 * 16 * 3, 90));
  write_png(f, dir / "src.png");
  test::spit(dir / "in.y4m", "x");
  write_fake_encoder(dir / "fake.sh", dir / "src.png", 0);
  ScopedEnv env(kEncoderEnv, (dir / "fake.sh").string());
  const CliRun r = cli({"encode", "--input", (dir / "in.y4m").string(), "--out", (dir / "o.avi").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["frames"], 3);
  EXPECT_EQ(j["dump"], (dir / "o_frames").string());
  EXPECT_TRUE(fs::exists(dir / "o.avi"));
  EXPECT_TRUE(fs::exists(dir / "o_frames/frame_00003.png"));
}

TEST(Encoder, FailingToolReportsLog) {
  test::TempDir dir("enc");
  test::spit(dir / "in.y4m", "x");
  write_fake_encoder(dir / "fake.sh", dir / "none.png", 2);
  ScopedEnv env(kEncoderEnv, (dir / "fake.sh").string());
  const CliRun r = cli({"encode", "--input", (dir / "in.y4m").string(), "--out", (dir / "o.avi").string()});
  EXPECT_EQ(r.code, kExitToolFailed);
  EXPECT_NE(json::parse(r.err)["error"]["message"].get<std::string>().find("fake encoder"), std::string::npos);
}

TEST(Plot, PerfectRocPassesThroughTopLeft) {
  const std::vector<RocPoint> pts = {{0, 0}, {0, 1}, {1, 1}};
  const std::string svg = roc_svg(pts, 1.0);
  EXPECT_NE(svg.find("48.000,312.000 48.000,48.000 432.000,48.000"), std::string::npos) << svg;
  EXPECT_EQ(svg, roc_svg(pts, 1.0));
  EXPECT_EQ(roc_csv(pts), "fpr,tpr\n0.000000,0.000000\n0.000000,1.000000\n1.000000,1.000000\n");
}

TEST(Plot, ScoreCsvParsing) {
  const auto ps = parse_score_csv("frame_index,score,label\n0,0.25,0\n1,0.75,1\n");
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[1], (Prediction{0.75, 1, 1}));
  try {
    parse_score_csv("frame_index,score,label\n0,0.25,0\n1,abc,1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_score_csv("0,0.25,0\n"), ParseError);
  EXPECT_THROW(parse_score_csv("frame_index,score,label\n0,1.5,0\n"), ParseError);
}

TEST(Plot, SeriesHasOneVertexPerFrame) {
  std::vector<Prediction> s;
  for (int t = 0; t < 120; ++t) s.push_back(Prediction{0.5 + 0.4 * std::sin(t * 0.1), t % 2, t});
  const std::string svg = series_svg(s);
  const auto a = svg.find("stroke=\"firebrick\"");
  ASSERT_NE(a, std::string::npos);
  const auto open = svg.find("points=\"", a) + 8;
  const std::string pts = svg.substr(open, svg.find('"', open) - open);
  EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 120);
  EXPECT_EQ(svg, series_svg(s));
  const std::string csv = series_csv(s);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 121);
}

// synth -> extract -> train -> eval -> plot -> detect on a tiny dataset.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir("pipe");
    const auto p = [](const char* n) { return (*dir_ / n).string(); };
    ASSERT_EQ(cli({"synth", "--out", p("data"), "--n", "40", "--seed", "3", "--width", "64", "--height", "64"}).code, 0);
    ASSERT_EQ(cli({"extract", "--manifest", p("data/train.jsonl"), "--out", p("train.dhf1")}).code, 0);
    ASSERT_EQ(cli({"extract", "--manifest", p("data/test.jsonl"), "--out", p("test.dhf1")}).code, 0);
    train_ = cli({"train", "--train", p("train.dhf1"), "--val", p("test.dhf1"), "--out", p("m.dhw1"), "--preset",
                  "tiny", "--epochs", "2", "--batch", "8", "--seed", "5"});
    VideoConfig vc;
    vc.n_frames = 13;
    vc.width = 64;
    vc.height = 64;
    write_frames(synth_single_video(vc, 0, 6, 5), *dir_ / "video");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string path(const char* n) { return (*dir_ / n).string(); }
  static test::TempDir* dir_;
  static CliRun train_;
};

test::TempDir* Pipeline::dir_ = nullptr;
CliRun Pipeline::train_;

TEST_F(Pipeline, TrainPrintsEpochLinesAndSavesCheckpoint) {
  ASSERT_EQ(train_.code, 0) << train_.err;
  std::istringstream lines(train_.out);
  std::string line;
  int epochs = 0;
  while (std::getline(lines, line))
    if (json::parse(line).contains("epoch")) ++epochs;
  EXPECT_EQ(epochs, 2);
  EXPECT_TRUE(fs::exists(path("m.dhw1")));
  EXPECT_TRUE(fs::exists(path("m.dhw1.json")));
}

TEST_F(Pipeline, EvalReportAndRocPlot) {
  const CliRun r = cli({"eval", "--model", path("m.dhw1"), "--features", path("test.dhf1"), "--out", path("report.json"),
                        "--scores", path("scores.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(test::slurp(path("report.json")));
  for (const char* k : {"acc", "tnr", "pre", "rec", "f1", "auc"}) EXPECT_TRUE(rep.contains(k)) << k;
  EXPECT_TRUE(rep["roc"].is_array());
  const auto rows = parse_score_csv(test::slurp(path("scores.csv")));
  EXPECT_EQ(rows.size(), 4u);
  ASSERT_EQ(cli({"plot", "--input", path("report.json"), "--out", path("roc.svg")}).code, 0);
  EXPECT_NE(test::slurp(path("roc.svg")).find("<svg"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("roc.csv")));
}

TEST_F(Pipeline, DetectModes) {
  CliRun r = cli({"detect", "--model", path("m.dhw1"), "--frames", path("video"), "--mode", "temporal", "--q-s", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 14);
  const std::string temporal = r.out;
  r = cli({"detect", "--model", path("m.dhw1"), "--frames", path("video"), "--mode", "frame", "--q-s", "5"});
  EXPECT_EQ(r.out, temporal);
  r = cli({"detect", "--model", path("m.dhw1"), "--frames", path("video"), "--mode", "gop", "--phi", "5", "--gop", "6",
           "--q-s", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json g = json::parse(r.out);
  EXPECT_EQ(g["votes"].size(), 3u);  // frames 0, 6 and 12
  EXPECT_EQ(g["phi"], 5);
  r = cli({"detect", "--model", path("m.dhw1"), "--frames", path("video"), "--mode", "first-iframe", "--q-s", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json f = json::parse(r.out);
  EXPECT_EQ(f["frame_index"], 0);
  // The first data row of the temporal scan scores the same frame.
  const auto rows = parse_score_csv(temporal);
  EXPECT_EQ(f["label"], rows[0].label);

  // A one-frame directory.
  test::TempDir one("one");
  fs::copy_file(path("video/frame_00000.pgm"), one / "frame_00000.pgm");
  r = cli({"detect", "--model", path("m.dhw1"), "--frames", one.path().string(), "--mode", "first-iframe", "--q-s",
           "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["score"], f["score"]);
  r = cli({"plot", "--input", (one / "none.csv").string(), "--out", (one / "s.svg").string()});
  EXPECT_EQ(r.code, kExitIo);
}

TEST_F(Pipeline, IncompatibleFeaturesAreRejected) {
  test::TempDir d("inc");
  const auto p = [&](const char* n) { return (d / n).string(); };
  ASSERT_EQ(cli({"synth", "--out", p("data"), "--n", "4", "--width", "32", "--height", "32"}).code, 0);
  ASSERT_EQ(cli({"extract", "--manifest", p("data/manifest.jsonl"), "--out", p("f.dhf1"), "--alpha", "30"}).code, 0);
  const CliRun r = cli({"eval", "--model", path("m.dhw1"), "--features", p("f.dhf1")});
  EXPECT_EQ(r.code, kExitIncompatible);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "incompatible_artifact");
}

}  // namespace
}  // namespace dhnet
