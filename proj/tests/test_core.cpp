#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ccrm/core.hpp"
#include "oracle.hpp"

using namespace ccrm;

namespace {

EncodingMask row_mask(std::vector<double> values) {
  EncodingMask m;
  m.rows = 1;
  m.cols = values.size();
  m.values = std::move(values);
  return m;
}

double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

} // namespace

// ---------------------------------------------------------------------------
// mask

TEST(Mask, CalibrationBlocksAreTransparent) {
  for (std::uint64_t seed : {0u, 1u, 42u}) {
    const EncodingMask m = make_mask(8, 8, MaskStyle::binary, seed);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(m.at(r, c), 1.0);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 4; c < 8; ++c) EXPECT_EQ(m.at(r, c), 1.0);
  }
}

TEST(Mask, BinaryFillFractionNearHalf) {
  const EncodingMask m = make_mask(64, 64, MaskStyle::binary, 3);
  std::size_t ones = 0, total = 0;
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c) {
      if (m.in_calibration(r, c)) continue;
      const double v = m.at(r, c);
      ASSERT_TRUE(v == 0.0 || v == 1.0);
      ones += v == 1.0;
      ++total;
    }
  const double frac = static_cast<double>(ones) / static_cast<double>(total);
  EXPECT_GE(frac, 0.4);
  EXPECT_LE(frac, 0.6);
}

TEST(Mask, GreyValuesInUnitInterval) {
  const EncodingMask m = make_mask(16, 20, MaskStyle::grey, 9);
  bool strictly_inside = false;
  for (double v : m.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    strictly_inside |= v > 0.0 && v < 1.0;
  }
  EXPECT_TRUE(strictly_inside);
}

TEST(Mask, DeterministicPerSeed) {
  EXPECT_EQ(make_mask(32, 16, MaskStyle::grey, 5), make_mask(32, 16, MaskStyle::grey, 5));
  EXPECT_EQ(make_mask(32, 16, MaskStyle::binary, 5), make_mask(32, 16, MaskStyle::binary, 5));
  EXPECT_NE(make_mask(32, 16, MaskStyle::grey, 5), make_mask(32, 16, MaskStyle::grey, 6));
}

TEST(Mask, TooSmallIsRejected) {
  EXPECT_THROW(make_mask(7, 8, MaskStyle::binary, 0), InvalidArgument);
  EXPECT_THROW(make_mask(8, 7, MaskStyle::grey, 0), InvalidArgument);
}

TEST(Mask, ValidateRejectsOutOfRangeAndBadLength) {
  EncodingMask m = row_mask({0.5, 1.5});
  EXPECT_THROW(validate(m), InvalidArgument);
  m = row_mask({0.5, std::nan("")});
  EXPECT_THROW(validate(m), InvalidArgument);
  m = row_mask({0.5, 0.5});
  m.cols = 3;
  EXPECT_THROW(validate(m), InvalidArgument);
}

TEST(Motion, ValidateRejectsBadProfiles) {
  EXPECT_THROW(validate(MotionProfile{}), InvalidArgument);
  EXPECT_THROW(validate(MotionProfile({1, 0})), InvalidArgument);
  EXPECT_THROW(validate(MotionProfile({0, 1}, {1.0, 0.0})), InvalidArgument);
  EXPECT_THROW(validate(MotionProfile({0, 1}, {1.0})), InvalidArgument);
  EXPECT_NO_THROW(validate(MotionProfile({0, -2, 3})));
}

// ---------------------------------------------------------------------------
// geometry

TEST(DetectorGeometry, WideFieldZeroMotion) {
  const MotionProfile zero = MotionProfile::zero(1400);
  EXPECT_EQ(detector_dims(200, 500, zero), (DetectorDims{200, 1899}));
  EXPECT_EQ(detector_dims(350, 350, zero), (DetectorDims{350, 1749}));
}

TEST(DetectorGeometry, SingleFrameMatchesMask) {
  const EncodingMask m = make_mask(12, 9, MaskStyle::grey, 1);
  EXPECT_EQ(detector_dims(m, 1, MotionProfile::zero(1)), (DetectorDims{12, 9}));
}

TEST(DetectorGeometry, RowsGrowWithOffsetSpan) {
  const MotionProfile m({0, -2, 1, 3, -1});
  EXPECT_EQ(detector_dims(64, 10, m).rows, 69u);
  EXPECT_EQ(row_origin_for(m), 2u);
}

TEST(DetectorGeometry, OneColumnPerAddedFrame) {
  for (std::size_t f = 1; f < 30; ++f)
    EXPECT_EQ(detector_dims(8, 11, MotionProfile::zero(f + 1)).cols, detector_dims(8, 11, MotionProfile::zero(f)).cols + 1);
}

TEST(DetectorGeometry, FrameCountMismatchIsRejected) {
  const EncodingMask m = make_mask(8, 8, MaskStyle::grey, 0);
  EXPECT_THROW(detector_dims(m, 3, MotionProfile::zero(4)), InvalidArgument);
}

// ---------------------------------------------------------------------------
// forward / adjoint / overlap weights

TEST(Forward, TwoFrameHandExpansion) {
  const double a1 = 0.3, a2 = 0.7, p = 2, q = 3, u = 5, v = 7;
  const EncodingMask mask = row_mask({a1, a2});
  const FrameCube x(2, 1, 2, std::vector<double>{p, q, u, v});
  const Measurement y = forward(x, mask, MotionProfile::zero(2));
  ASSERT_EQ(y.rows, 1u);
  ASSERT_EQ(y.cols, 3u);
  EXPECT_DOUBLE_EQ(y.data[0], a1 * p);
  EXPECT_DOUBLE_EQ(y.data[1], a2 * q + a1 * u);
  EXPECT_DOUBLE_EQ(y.data[2], a2 * v);
}

TEST(Forward, ZeroCubeGivesZeroMeasurement) {
  const EncodingMask mask = make_mask(8, 8, MaskStyle::grey, 2);
  const MotionProfile motion({0, 1, -1, 2});
  const Measurement y = forward(FrameCube(4, 8, 8), mask, motion);
  for (double v : y.data) EXPECT_EQ(v, 0.0);
}

TEST(Forward, NonnegativeCubeGivesNonnegativeMeasurement) {
  std::mt19937_64 rng(4);
  const EncodingMask mask = oracle::random_mask(5, 6, rng);
  const MotionProfile motion = oracle::random_motion(7, rng);
  const Measurement y = forward(oracle::random_cube(7, 5, 6, rng, 0.0, 1.0), mask, motion);
  for (double v : y.data) EXPECT_GE(v, 0.0);
}

TEST(Forward, MatchesDenseOracleOnRandomInstance) {
  std::mt19937_64 rng(11);
  const EncodingMask mask = oracle::random_mask(4, 5, rng);
  const MotionProfile motion = MotionProfile::zero(3);
  const FrameCube x = oracle::random_cube(3, 4, 5, rng);
  const oracle::Dense H = oracle::sensing_matrix(mask, motion);
  EXPECT_LE(max_abs_diff(forward(x, mask, motion).data, H.apply(x.data())), 1e-6);
}

TEST(Forward, IsLinear) {
  std::mt19937_64 rng(12);
  const EncodingMask mask = oracle::random_mask(6, 7, rng);
  const MotionProfile motion = oracle::random_motion(5, rng);
  const FrameCube x = oracle::random_cube(5, 6, 7, rng), z = oracle::random_cube(5, 6, 7, rng);
  const double alpha = 1.75, beta = -0.4;
  FrameCube comb = x;
  for (std::size_t i = 0; i < comb.size(); ++i) comb.data()[i] = alpha * x.data()[i] + beta * z.data()[i];
  const Measurement lhs = forward(comb, mask, motion), fx = forward(x, mask, motion), fz = forward(z, mask, motion);
  std::vector<double> rhs(lhs.data.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = alpha * fx.data[i] + beta * fz.data[i];
  EXPECT_LE(max_abs_diff(lhs.data, rhs), 1e-6 * std::max(1.0, oracle::norm(rhs)));
}

TEST(Forward, ShapeMismatchIsRejected) {
  const EncodingMask mask = make_mask(8, 8, MaskStyle::grey, 0);
  EXPECT_THROW(forward(FrameCube(3, 8, 9), mask, MotionProfile::zero(3)), InvalidArgument);
  EXPECT_THROW(forward(FrameCube(3, 8, 8), mask, MotionProfile::zero(4)), InvalidArgument);
}

TEST(Adjoint, ZeroMeasurementGivesZeroCube) {
  const EncodingMask mask = make_mask(8, 10, MaskStyle::grey, 3);
  const MotionProfile motion({0, 2, 1});
  const FrameCube x = adjoint(empty_measurement(mask, motion), mask, motion, 3);
  for (double v : x.data()) EXPECT_EQ(v, 0.0);
}

TEST(Adjoint, SinglePixelSpreadsAlongItsDiagonal) {
  std::mt19937_64 rng(5);
  const EncodingMask mask = oracle::random_mask(4, 5, rng, 0.1);
  const MotionProfile motion({0, 1, -1, 0}, {1.0, 0.5, 2.0, 1.5});
  const std::size_t f0 = 3;
  Measurement y = empty_measurement(mask, motion);
  y.at(y.row_origin, f0) = 1.0;
  const FrameCube x = adjoint(y, mask, motion, 4);
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 5; ++c) {
        const bool hit = static_cast<int>(r) + motion.offsets[f] == 0 && c + f == f0;
        EXPECT_DOUBLE_EQ(x.at(f, r, c), hit ? motion.gains[f] * mask.at(r, c) : 0.0) << f << "," << r << "," << c;
      }
}

TEST(Adjoint, RejectsInconsistentMeasurement) {
  const EncodingMask mask = make_mask(8, 8, MaskStyle::grey, 0);
  const MotionProfile motion({0, 1});
  Measurement y = empty_measurement(mask, motion);
  y.row_origin = 1;
  EXPECT_THROW(adjoint(y, mask, motion, 2), InvalidArgument);
  EXPECT_THROW(adjoint(Measurement(9, 8, 0), mask, motion, 2), InvalidArgument);
}

TEST(Adjoint, DotProductIdentityOnRandomInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t F = dim(rng), M = dim(rng), N = dim(rng);
    const EncodingMask mask = oracle::random_mask(M, N, rng);
    const MotionProfile motion = oracle::random_motion(F, rng);
    const FrameCube x = oracle::random_cube(F, M, N, rng);
    const Measurement y = oracle::random_measurement(mask, motion, rng);
    const double lhs = oracle::dot(forward(x, mask, motion).data, y.data);
    const double rhs = oracle::dot(x.data(), adjoint(y, mask, motion, F).data());
    EXPECT_LE(std::abs(lhs - rhs), 1e-6 * oracle::norm(x.data()) * oracle::norm(y.data)) << "trial " << trial;
  }
}

TEST(Adjoint, UnitVoxelRoundTripIsGramColumn) {
  std::mt19937_64 rng(6);
  const EncodingMask mask = oracle::random_mask(3, 4, rng, 0.1);
  const MotionProfile motion = oracle::random_motion(5, rng);
  const oracle::Dense H = oracle::sensing_matrix(mask, motion);
  const oracle::Dense gram = H.transpose() * H;
  for (std::size_t j = 0; j < 5 * 3 * 4; ++j) {
    FrameCube e(5, 3, 4);
    e.data()[j] = 1.0;
    const FrameCube back = adjoint(forward(e, mask, motion), mask, motion, 5);
    const double w = motion.gains[j / 12] * mask.values[j % 12];
    EXPECT_GE(back.data()[j], w * w - 1e-12);
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back.data()[i], gram(i, j), 1e-12);
  }
}

TEST(OverlapWeights, SingleFrameIsMaskSquared) {
  std::mt19937_64 rng(7);
  const EncodingMask mask = oracle::random_mask(4, 6, rng);
  const Measurement R = overlap_weights(mask, MotionProfile::zero(1), 1);
  ASSERT_EQ(R.data.size(), mask.values.size());
  for (std::size_t i = 0; i < R.data.size(); ++i) EXPECT_DOUBLE_EQ(R.data[i], mask.values[i] * mask.values[i]);
}

TEST(OverlapWeights, EqualsForwardOfMaskCubeWithUnitGains) {
  const EncodingMask mask = make_mask(10, 12, MaskStyle::grey, 8);
  const MotionProfile motion({0, 1, 3, -1, 0, 2});
  FrameCube x(6, 10, 12);
  for (std::size_t f = 0; f < 6; ++f) std::copy(mask.values.begin(), mask.values.end(), x.frame(f).begin());
  EXPECT_LE(max_abs_diff(overlap_weights(mask, motion, 6).data, forward(x, mask, motion).data), 1e-12);
}

// Every (M, N, F) with M*N*F <= 120, random motion and gains.
TEST(DenseOracle, ForwardAdjointAndWeightsOnAllSmallShapes) {
  std::mt19937_64 rng(99);
  int instances = 0;
  for (std::size_t M = 1; M <= 120; ++M)
    for (std::size_t N = 1; M * N <= 120; ++N)
      for (std::size_t F = 1; M * N * F <= 120; ++F) {
        const EncodingMask mask = oracle::random_mask(M, N, rng);
        const MotionProfile motion = oracle::random_motion(F, rng);
        const oracle::Dense H = oracle::sensing_matrix(mask, motion);
        const oracle::Dense Ht = H.transpose();
        const FrameCube x = oracle::random_cube(F, M, N, rng);
        const Measurement y = oracle::random_measurement(mask, motion, rng);
        ASSERT_EQ(H.rows, y.data.size());

        EXPECT_LE(max_abs_diff(forward(x, mask, motion).data, H.apply(x.data())), 1e-6);
        EXPECT_LE(max_abs_diff(adjoint(y, mask, motion, F).data(), Ht.apply(y.data)), 1e-6);

        const Measurement R = overlap_weights(mask, motion, F);
        const oracle::Dense HHt = H * Ht;
        for (std::size_t p = 0; p < H.rows; ++p) ASSERT_NEAR(R.data[p], HHt(p, p), 1e-6) << M << "x" << N << "x" << F;
        // H H^T is diagonal: each voxel feeds exactly one detector pixel.
        for (std::size_t j = 0; j < H.cols; ++j) {
          int nz = 0;
          for (std::size_t i = 0; i < H.rows; ++i) nz += H(i, j) != 0.0;
          ASSERT_LE(nz, 1);
        }
        ++instances;
      }
  EXPECT_GT(instances, 500);
}

// ---------------------------------------------------------------------------
// calculators

TEST(CompressionRatio, WideFieldValues) {
  EXPECT_NEAR(compression_ratio(500, 1400), 500.0 * 1400.0 / 1899.0, 1e-12);
  EXPECT_NEAR(compression_ratio(350, 1400), 350.0 * 1400.0 / 1749.0, 1e-12);
  EXPECT_NEAR(compression_ratio(500, 1400), 368.6, 0.05);
  EXPECT_NEAR(compression_ratio(350, 1400), 280.2, 0.05);
  // The published integers are the truncated values.
  EXPECT_EQ(static_cast<long>(compression_ratio(500, 1400)), 368);
  EXPECT_EQ(static_cast<long>(compression_ratio(350, 1400)), 280);
}

TEST(CompressionRatio, SingleFrameIsOne) {
  for (long long n : {1, 7, 500}) EXPECT_DOUBLE_EQ(compression_ratio(n, 1), 1.0);
}

TEST(CompressionRatio, AtLeastOneAndIncreasingInFrames) {
  for (long long n = 1; n <= 40; ++n)
    for (long long f = 1; f <= 40; ++f) {
      EXPECT_GE(compression_ratio(n, f), 1.0);
      if (n >= 2) {
        EXPECT_GT(compression_ratio(n, f + 1), compression_ratio(n, f));
      }
    }
}

TEST(CompressionRatio, NonPositiveIsRejected) {
  EXPECT_THROW(compression_ratio(0, 5), InvalidArgument);
  EXPECT_THROW(compression_ratio(5, -1), InvalidArgument);
}

TEST(FrameRate, ZeroSpeedGivesZero) { EXPECT_EQ(frame_rate({0.0, 0.2, 5e-6}), 0.0); }

TEST(FrameRate, LinearInSpeedAndArmInverseInPitch) {
  const CameraGeometry g{0.5, 0.22384, 5.86e-6};
  const double base = frame_rate(g);
  EXPECT_NEAR(frame_rate({1.0, 0.22384, 5.86e-6}), 2.0 * base, 1e-9 * base);
  EXPECT_NEAR(frame_rate({0.5, 0.44768, 5.86e-6}), 2.0 * base, 1e-9 * base);
  EXPECT_NEAR(frame_rate({0.5, 0.22384, 2.93e-6}), 2.0 * base, 1e-9 * base);
}

TEST(FrameRate, OperatingPointNear120k) {
  EXPECT_NEAR(frame_rate({0.5, 0.22384, 5.86e-6}), 1.2e5, 0.01 * 1.2e5);
}

TEST(FrameRate, WarnsWhenPitchNotSmallerThanArm) {
  std::ostringstream warn;
  const CameraGeometry bad{1.0, 1e-6, 2e-6};
  EXPECT_FALSE(frame_rate_valid(bad));
  EXPECT_NO_THROW(frame_rate(bad, &warn));
  EXPECT_NE(warn.str().find("warning"), std::string::npos);
  std::ostringstream quiet;
  frame_rate({1.0, 0.2, 5e-6}, &quiet);
  EXPECT_TRUE(quiet.str().empty());
}

TEST(FrameRate, InvalidGeometryIsRejected) {
  EXPECT_THROW(frame_rate({-1.0, 0.2, 5e-6}), InvalidArgument);
  EXPECT_THROW(frame_rate({1.0, 0.0, 5e-6}), InvalidArgument);
  EXPECT_THROW(frame_rate({1.0, 0.2, 0.0}), InvalidArgument);
}
