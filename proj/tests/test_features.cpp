#include <gtest/gtest.h>

#include "dhnet/error.hpp"
#include "dhnet/feature_file.hpp"
#include "dhnet/features.hpp"
#include "dhnet/reference/kernels.hpp"
#include "dhnet/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace dhnet {
namespace {

TEST(BlockDct, ZeroPlane) {
  const auto s = block_dct_stack(YPlane(32, 32), 8);
  EXPECT_EQ(s.channels(), 64);
  EXPECT_EQ(s.blocks(), 16u);
  for (double v : s.data) EXPECT_EQ(v, 0.0);
}

TEST(BlockDct, ConstantPlaneDeltaFour) {
  const auto s = block_dct_stack(YPlane(16, 12, 8.0), 4);
  for (double v : s.channel(0)) EXPECT_NEAR(v, 32.0, 1e-12);
  for (int c = 1; c < 16; ++c)
    for (double v : s.channel(c)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(BlockDct, MatchesBruteForceOracle) {
  Rng rng(21);
  for (int delta : kFeatureDeltas) {
    const YPlane p = test::random_plane(64, 48, rng);
    const auto s = block_dct_stack(p, delta);
    const auto o = oracle::block_dct(p, delta);
    for (int c = 0; c < s.channels(); ++c) EXPECT_LT(test::max_abs_diff(s.channel(c), o[c]), 1e-9);
    const auto r = reference::block_dct_stack(p, delta);
    EXPECT_LT(test::max_abs_diff(s.data, r.data), 1e-9);
  }
}

TEST(BlockDct, RejectsUnsupportedDelta) {
  EXPECT_THROW(block_dct_stack(YPlane(32, 32), 5), InvalidArgument);
  const std::array<int, 1> allowed = {2};
  EXPECT_NO_THROW(block_dct_stack(YPlane(32, 32), 2, allowed));
  EXPECT_THROW(block_dct_stack(YPlane(8, 8), 16), InvalidArgument);
}

TEST(CumulativeHist, ZeroStackClosedForm) {
  const auto h = cumulative_hist(block_dct_stack(YPlane(32, 32), 8), 60);
  EXPECT_EQ(h.rows(), 121);
  for (int b = -60; b <= 60; ++b)
    for (int c = 0; c < 64; ++c) ASSERT_EQ(h.at(b, c), b < 0 ? 1.0 : 0.0);
}

TEST(CumulativeHist, MatchesCountingOracle) {
  Rng rng(4);
  for (int delta : kFeatureDeltas) {
    const auto s = block_dct_stack(test::random_plane(64, 64, rng), delta);
    const auto h = cumulative_hist(s, 60);
    const auto r = reference::cumulative_hist(s, 60);
    for (int c = 0; c < s.channels(); ++c) {
      const std::vector<double> vals(s.channel(c).begin(), s.channel(c).end());
      for (int b = -60; b <= 60; ++b) {
        ASSERT_NEAR(h.at(b, c), oracle::exceed_fraction(vals, b, kThresholdTolerance), 1e-12);
        ASSERT_EQ(h.at(b, c), r.at(b, c));
      }
    }
  }
}

TEST(CumulativeHist, BoundedAndMonotone) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = cumulative_hist(block_dct_stack(test::random_plane(48, 48, rng), 4), 60);
    for (int c = 0; c < h.cols(); ++c)
      for (int b = -60; b <= 60; ++b) {
        ASSERT_GE(h.at(b, c), 0.0);
        ASSERT_LE(h.at(b, c), 1.0);
        if (b > -60) ASSERT_LE(h.at(b, c), h.at(b - 1, c));
      }
  }
}

TEST(CumulativeHist, IntegerCoefficientOnBoundaryIsNotCounted) {
  // A constant plane of 2 gives DC = 2 * delta exactly; T(0) = 0 means the
  // boundary b = 8 (delta 4) does not count it.
  const auto h = cumulative_hist(block_dct_stack(YPlane(8, 8, 2.0), 4), 60);
  EXPECT_EQ(h.at(7, 0), 1.0);
  EXPECT_EQ(h.at(8, 0), 0.0);
}

TEST(HistFeature, ZeroPlaneSingleEntry) {
  const auto f = hist_feature(cumulative_hist(block_dct_stack(YPlane(64, 64), 8), 60));
  EXPECT_EQ(f.rows(), 120);
  EXPECT_EQ(f.cols(), 64);
  for (int c = 0; c < 64; ++c)
    for (int b = -60; b < 60; ++b) ASSERT_EQ(f.at(b, c), b == -1 ? -1.0 : 0.0);
}

TEST(HistFeature, RangeAndTelescopingSum) {
  Rng rng(13);
  const YPlane p = test::random_plane(64, 64, rng);
  for (int delta : kFeatureDeltas) {
    const auto cum = cumulative_hist(block_dct_stack(p, delta), 60);
    const auto f = hist_feature(cum);
    for (int c = 0; c < f.cols(); ++c) {
      double s = 0.0;
      for (int b = -60; b < 60; ++b) {
        ASSERT_LE(f.at(b, c), 0.0);
        ASSERT_GE(f.at(b, c), -1.0);
        s -= f.at(b, c);
      }
      EXPECT_NEAR(s, cum.at(-60, c) - cum.at(60, c), 1e-12);
      EXPECT_LE(s, 1.0 + 1e-12);
    }
  }
}

TEST(HistFeature, MatchesOracleOnTextures) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const YPlane p = synth_texture(64, 64, TextureMix{}, rng);
    for (int delta : kFeatureDeltas) {
      const auto f = hist_feature(cumulative_hist(block_dct_stack(p, delta), 60));
      EXPECT_LT(test::max_abs_diff(f.values, oracle::hist_feature(p, delta, 60, kThresholdTolerance)), 1e-9);
    }
  }
}

TEST(HistFeature, ConstantShiftMovesOnlyDc) {
  Rng rng(2);
  YPlane p(64, 64);
  // Small samples keep the DC coefficient (delta * mean) inside the binned range.
  for (double& v : p.samples()) v = static_cast<double>(rng.below(5));
  YPlane q = p;
  for (double& v : q.samples()) v += 1;
  for (int delta : kFeatureDeltas) {
    const auto a = hist_feature(cumulative_hist(block_dct_stack(p, delta), 60));
    const auto b = hist_feature(cumulative_hist(block_dct_stack(q, delta), 60));
    bool dc_differs = false;
    for (int bin = -60; bin < 60; ++bin) {
      dc_differs |= a.at(bin, 0) != b.at(bin, 0);
      for (int c = 1; c < a.cols(); ++c) ASSERT_EQ(a.at(bin, c), b.at(bin, c)) << delta << " " << bin << " " << c;
    }
    EXPECT_TRUE(dc_differs);
  }
}

TEST(AuxFeature, Examples) {
  for (double v : aux_feature(q1_matrix(), 3).values) EXPECT_EQ(v, 3.0);
  const auto a = aux_feature(q2_matrix(), 5);
  EXPECT_EQ((std::array{a.values[0], a.values[1], a.values[2], a.values[3]}), (std::array{40.0, 80.0, 95.0, 110.0}));
  const auto id = aux_feature(q2_matrix(), 1);
  for (int k = 0; k < 64; ++k) EXPECT_EQ(id.values[k], q2_matrix()[k]);
  for (int q = 1; q <= 31; ++q)
    for (double v : aux_feature(q2_matrix(), q).values) ASSERT_GE(v, q);
  EXPECT_THROW(aux_feature(q1_matrix(), 0), InvalidArgument);
}

TEST(ExtractAll, ShapesAndDeterminism) {
  Rng rng(31);
  const YPlane p = synth_texture(256, 256, TextureMix{}, rng);
  const FeatureSet a = extract_all(p, q2_matrix(), 5);
  const FeatureSet b = extract_all(p, q2_matrix(), 5);
  const std::array<int, 3> cols = {16, 64, 256};
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(a.hists[s].rows(), 120);
    EXPECT_EQ(a.hists[s].cols(), cols[s]);
    EXPECT_EQ(a.hists[s].values.size(), 120u * cols[s]);
    EXPECT_EQ(a.hists[s].values, b.hists[s].values);
  }
  EXPECT_EQ(a.aux.values, b.aux.values);
  EXPECT_EQ(a.aux.values.size(), 64u);
  EXPECT_THROW(extract_all(YPlane(8, 8), q1_matrix(), 3), InvalidArgument);
}

TEST(ExtractAll, PerturbationChangesFeatures) {
  Rng rng(32);
  const YPlane p = synth_texture(64, 64, TextureMix{}, rng);
  YPlane q = p;
  for (double& v : q.samples()) v = std::clamp(v + rng.normal() * 20.0, 0.0, 255.0);
  EXPECT_NE(extract_all(p, q1_matrix(), 3).hists[1].values, extract_all(q, q1_matrix(), 3).hists[1].values);
}

TEST(ExtractAll, DoubleCompressionSignalExceedsSingleBatchNoise) {
  // Mean |F_h8(single q5) - F_h8(double 3,5)| over matched planes versus the
  // same statistic between two independent single q5 batches.
  const auto q3 = QuantConfig::make(3, q2_matrix());
  const auto q5 = QuantConfig::make(5, q2_matrix());
  const int n = 200;
  std::vector<double> single_a(120 * 64, 0.0), single_b(120 * 64, 0.0), dbl(120 * 64, 0.0);
  for (int i = 0; i < n; ++i) {
    Rng ra(1000 + i), rb(5000 + i);
    const YPlane a = synth_texture(64, 64, TextureMix{}, ra);
    const YPlane b = synth_texture(64, 64, TextureMix{}, rb);
    const auto fa = extract_all(compress_plane(a, q5), q1_matrix(), 5).hists[1].values;
    const auto fb = extract_all(compress_plane(b, q5), q1_matrix(), 5).hists[1].values;
    const auto fd = extract_all(double_compress(a, q3, q5), q1_matrix(), 5).hists[1].values;
    for (std::size_t k = 0; k < fa.size(); ++k) {
      single_a[k] += fa[k] / n;
      single_b[k] += fb[k] / n;
      dbl[k] += fd[k] / n;
    }
  }
  double signal = 0.0, noise = 0.0;
  for (std::size_t k = 0; k < dbl.size(); ++k) {
    signal += std::abs(single_a[k] - dbl[k]);
    noise += std::abs(single_a[k] - single_b[k]);
  }
  EXPECT_GT(signal, noise);
}

TEST(FeatureFile, RoundTripIsBitExact) {
  test::TempDir dir("dhf");
  Rng rng(12);
  std::vector<FeatureRecord> recs;
  for (int i = 0; i < 5; ++i) {
    const YPlane p = test::random_plane(32, 32, rng);
    recs.push_back(FeatureRecord::from_features(extract_all(p, q2_matrix(), i + 1), i % 2, i + 1));
  }
  write_feature_file(recs, dir / "a.dhf1");
  const auto back = read_feature_file(dir / "a.dhf1");
  EXPECT_EQ(back, recs);
  write_feature_file(back, dir / "b.dhf1");
  EXPECT_EQ(test::slurp(dir / "a.dhf1"), test::slurp(dir / "b.dhf1"));
  const std::string bytes = test::slurp(dir / "a.dhf1");
  EXPECT_EQ(bytes.substr(0, 4), "DHF1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 5);
  const std::size_t per = 2 + 3 * 5 + 4 * 120 * (16 + 64 + 256) + 4 * 64;
  EXPECT_EQ(bytes.size(), 8 + 5 * per);
}

TEST(FeatureFile, RejectsCorruption) {
  test::TempDir dir("dhf");
  test::spit(dir / "bad.dhf1", "DHF2\0\0\0\0");
  EXPECT_THROW(read_feature_file(dir / "bad.dhf1"), ParseError);
  Rng rng(3);
  const auto rec = FeatureRecord::from_features(extract_all(test::random_plane(16, 16, rng), q1_matrix(), 3), 0, 3);
  write_feature_file(std::span(&rec, 1), dir / "ok.dhf1");
  std::string bytes = test::slurp(dir / "ok.dhf1");
  test::spit(dir / "trunc.dhf1", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_feature_file(dir / "trunc.dhf1"), ParseError);
  test::spit(dir / "extra.dhf1", bytes + "x");
  EXPECT_THROW(read_feature_file(dir / "extra.dhf1"), ParseError);
  EXPECT_THROW(read_feature_file(dir / "missing.dhf1"), IoError);
}

TEST(FeatureFile, StreamingWriterMatchesBulkWriter) {
  test::TempDir dir("dhf");
  Rng rng(8);
  std::vector<FeatureRecord> recs;
  for (int i = 0; i < 3; ++i)
    recs.push_back(FeatureRecord::from_features(extract_all(test::random_plane(16, 16, rng), q1_matrix(), 2), 1, 2));
  {
    FeatureFileWriter w(dir / "s.dhf1");
    for (const auto& r : recs) w.append(r);
    w.close();
    EXPECT_EQ(w.count(), 3u);
    EXPECT_THROW(w.append(recs[0]), InvalidArgument);
  }
  write_feature_file(recs, dir / "b.dhf1");
  EXPECT_EQ(test::slurp(dir / "s.dhf1"), test::slurp(dir / "b.dhf1"));
}

}  // namespace
}  // namespace dhnet
