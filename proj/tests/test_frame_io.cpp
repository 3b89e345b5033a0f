#include <gtest/gtest.h>

#include <fstream>

#include "dhnet/error.hpp"
#include "dhnet/frame_io.hpp"
#include "support.hpp"

namespace dhnet {
namespace {

using test::TempDir;

// Round half up on the exact rational 0.299 R + 0.587 G + 0.114 B.
int luma_oracle(int r, int g, int b) {
  const int num = 299 * r + 587 * g + 114 * b;
  return num / 1000 + (num % 1000 >= 500 ? 1 : 0);
}

RgbFrame solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  std::vector<std::uint8_t> d;
  for (int i = 0; i < w * h; ++i) d.insert(d.end(), {r, g, b});
  return RgbFrame(w, h, d);
}

TEST(RgbToY, WhiteBlackRed) {
  for (auto [rgb, y] : {std::pair{std::array<std::uint8_t, 3>{255, 255, 255}, 255.0},
                        std::pair{std::array<std::uint8_t, 3>{0, 0, 0}, 0.0},
                        std::pair{std::array<std::uint8_t, 3>{255, 0, 0}, 76.0}}) {
    const YPlane p = rgb_to_y(solid(3, 2, rgb[0], rgb[1], rgb[2]));
    ASSERT_EQ(p.width(), 3);
    ASSERT_EQ(p.height(), 2);
    for (double v : p.samples()) EXPECT_EQ(v, y);
  }
}

TEST(RgbToY, ExhaustiveAgainstRationalOracle) {
  for (int r = 0; r < 256; ++r)
    for (int g = 0; g < 256; ++g)
      for (int b = 0; b < 256; ++b) {
        const int y = luma_bt601(r, g, b);
        ASSERT_EQ(y, luma_oracle(r, g, b)) << r << "," << g << "," << b;
        ASSERT_GE(y, 0);
        ASSERT_LE(y, 255);
      }
}

TEST(RgbToY, GrayscaleFixedPoint) {
  for (int v = 0; v < 256; ++v) EXPECT_EQ(luma_bt601(v, v, v), v);
}

TEST(RgbFrame, RejectsBadDimensions) {
  EXPECT_THROW(RgbFrame(0, 2, {}), InvalidArgument);
  EXPECT_THROW(RgbFrame(2, 2, std::vector<std::uint8_t>(11)), InvalidArgument);
}

TEST(IframeIndices, Examples) {
  EXPECT_EQ(iframe_indices(6, 18), (std::vector<int>{0, 6, 12}));
  EXPECT_EQ(iframe_indices(1, 3), (std::vector<int>{0, 1, 2}));
  const auto v = iframe_indices(6, 120);
  ASSERT_EQ(v.size(), 20u);
  EXPECT_EQ(v.front(), 0);
  EXPECT_EQ(v.back(), 114);
  EXPECT_TRUE(iframe_indices(4, 0).empty());
  EXPECT_THROW(iframe_indices(0, 10), InvalidArgument);
}

TEST(IframeIndices, LengthAndSpacing) {
  for (int g = 1; g <= 13; ++g)
    for (int n = 0; n <= 50; ++n) {
      const auto v = iframe_indices(g, n);
      ASSERT_EQ(v.size(), static_cast<std::size_t>((n + g - 1) / g));
      for (std::size_t k = 1; k < v.size(); ++k) ASSERT_EQ(v[k] - v[k - 1], g);
    }
}

TEST(Manifest, EmptyFileGivesEmptyList) {
  TempDir dir("manifest");
  test::spit(dir / "m.jsonl", "");
  EXPECT_TRUE(load_manifest(dir / "m.jsonl").empty());
}

TEST(Manifest, SingleRecordRoundTrip) {
  TempDir dir("manifest");
  const FrameRecord r{"planes/a b.pgm", 1, 7, QmId::kQ2, 6, 12};
  write_manifest(std::span(&r, 1), dir / "m.jsonl");
  const auto back = load_manifest(dir / "m.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(Manifest, TenThousandRecordsPreserveOrder) {
  TempDir dir("manifest");
  Rng rng(42);
  std::vector<FrameRecord> recs;
  const QmId ids[] = {QmId::kQ1, QmId::kQ2, QmId::kCustom};
  for (int i = 0; i < 10000; ++i)
    recs.push_back({"frames/f" + std::to_string(i) + ".pgm", static_cast<int>(rng.below(2)), rng.uniform_int(1, 31),
                    ids[rng.below(3)], rng.uniform_int(1, 12), i});
  write_manifest(recs, dir / "m.jsonl");
  EXPECT_EQ(load_manifest(dir / "m.jsonl"), recs);
}

TEST(Manifest, ByteStableAfterNormalization) {
  TempDir dir("manifest");
  test::spit(dir / "raw.jsonl",
             "{ \"frame_index\": 3, \"path\": \"x.pgm\", \"label\": 0, \"q_s_last\": 5, \"q_m_id\": \"Q1\", "
             "\"gop_size\": 6 }\n\n");
  const auto a = load_manifest(dir / "raw.jsonl");
  write_manifest(a, dir / "n1.jsonl");
  write_manifest(load_manifest(dir / "n1.jsonl"), dir / "n2.jsonl");
  EXPECT_EQ(test::slurp(dir / "n1.jsonl"), test::slurp(dir / "n2.jsonl"));
}

TEST(Manifest, MalformedLineReportsLineNumber) {
  TempDir dir("manifest");
  const FrameRecord r{"a.pgm", 0, 3, QmId::kQ1, 1, 0};
  test::spit(dir / "m.jsonl", manifest_line(r) + "\n" + manifest_line(r) + "\n{\"path\": 3}\n");
  try {
    load_manifest(dir / "m.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Manifest, RejectsOutOfRangeFields) {
  EXPECT_THROW(parse_manifest_line(R"({"path":"a","label":2,"q_s_last":3,"q_m_id":"Q1","gop_size":1,"frame_index":0})"),
               ParseError);
  EXPECT_THROW(parse_manifest_line(R"({"path":"a","label":0,"q_s_last":0,"q_m_id":"Q1","gop_size":1,"frame_index":0})"),
               ParseError);
  EXPECT_THROW(parse_manifest_line(R"({"path":"a","label":0,"q_s_last":3,"q_m_id":"Q9","gop_size":1,"frame_index":0})"),
               ParseError);
}

TEST(Manifest, MissingFileIsIoError) { EXPECT_THROW(load_manifest("/nonexistent/dir/m.jsonl"), IoError); }

TEST(Pgm, BitExactRoundTrip) {
  TempDir dir("pgm");
  Rng rng(5);
  const YPlane p = test::random_plane(37, 21, rng);
  write_pgm(p, dir / "a.pgm");
  const YPlane q = read_pgm(dir / "a.pgm");
  EXPECT_EQ(p, q);
  write_pgm(q, dir / "b.pgm");
  EXPECT_EQ(test::slurp(dir / "a.pgm"), test::slurp(dir / "b.pgm"));
  EXPECT_EQ(test::slurp(dir / "a.pgm").size(), std::string("P5\n37 21\n255\n").size() + 37 * 21);
}

TEST(Pgm, AcceptsHeaderComments) {
  TempDir dir("pgm");
  test::spit(dir / "c.pgm", std::string("P5\n# made by hand\n2 1\n255\n") + '\x07' + '\xff');
  const YPlane p = read_pgm(dir / "c.pgm");
  EXPECT_EQ(p(0, 0), 7.0);
  EXPECT_EQ(p(0, 1), 255.0);
}

TEST(Pgm, RejectsTruncatedAndWrongMaxval) {
  TempDir dir("pgm");
  test::spit(dir / "t.pgm", "P5\n4 4\n255\nabc");
  EXPECT_THROW(read_pgm(dir / "t.pgm"), ParseError);
  test::spit(dir / "m.pgm", "P5\n1 1\n65535\n\x01\x02");
  EXPECT_THROW(read_pgm(dir / "m.pgm"), ParseError);
  EXPECT_THROW(read_pgm(dir / "missing.pgm"), IoError);
}

TEST(Png, RoundTripAndLumaDispatch) {
  TempDir dir("png");
  Rng rng(9);
  std::vector<std::uint8_t> d(5 * 4 * 3);
  for (auto& v : d) v = static_cast<std::uint8_t>(rng.below(256));
  const RgbFrame f(5, 4, d);
  write_png(f, dir / "a.png");
  const RgbFrame g = read_png(dir / "a.png");
  EXPECT_EQ(g.width, 5);
  EXPECT_EQ(g.height, 4);
  EXPECT_EQ(g.data, f.data);
  EXPECT_EQ(load_luma(dir / "a.png"), rgb_to_y(f));
  write_pgm(rgb_to_y(f), dir / "a.pgm");
  EXPECT_EQ(load_luma(dir / "a.pgm"), rgb_to_y(f));
  EXPECT_THROW(load_luma(dir / "a.bmp"), InvalidArgument);
}

TEST(ListFrames, SortedAndFiltered) {
  TempDir dir("frames");
  for (const char* n : {"frame_00002.pgm", "frame_00000.pgm", "notes.txt", "frame_00001.png"})
    test::spit(dir / n, "x");
  const auto v = list_frames(dir.path());
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].filename(), "frame_00000.pgm");
  EXPECT_EQ(v[2].filename(), "frame_00002.pgm");
}

}  // namespace
}  // namespace dhnet
