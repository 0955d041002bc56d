#include <random>

#include <gtest/gtest.h>

#include "hs_oracle.hpp"
#include "mvtri/error.hpp"
#include "mvtri/triangulation.hpp"
#include "test_support.hpp"

namespace mvtri {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no mvtri::Error thrown";
  return ErrorCode::IoError;
}

struct Instance {
  std::vector<ProjectionMatrix> P;
  HomoPoint3 X;
  Track track;
};

Instance random_instance(std::mt19937_64& rng, int views, double sigma) {
  Instance in;
  const auto rig = test::random_rig(rng, views);
  in.P = test::projections(rig);
  in.X = HomoPoint3(test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -1, 1));
  in.track = test::make_track(in.P, in.X, rng, sigma);
  return in;
}

double epipolar_residual(const Mat3& F, const HomoPoint2& x1, const HomoPoint2& x2) {
  return std::abs(x2.normalized().coords.dot(F / F.norm() * x1.normalized().coords));
}

TEST(TriangulateLinear, NoiseFreeTwoViews) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Instance in = random_instance(rng, 2, 0.0);
    const TriangulationResult r = triangulate_linear(in.P, in.track);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.method, TriangulationMethod::Linear);
    EXPECT_LT((r.point.euclidean() - in.X.euclidean()).norm(), 1e-9);
    EXPECT_DOUBLE_EQ(r.point.w(), 1.0);
  }
}

TEST(TriangulateLinear, NoiseFreeThreeViews) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Instance in = random_instance(rng, 3, 0.0);
    const TriangulationResult r = triangulate_linear(in.P, in.track);
    EXPECT_LT((r.point.euclidean() - in.X.euclidean()).norm(), 1e-9);
    EXPECT_LT(r.geometric_error, 1e-16);
    EXPECT_EQ(r.per_view_residual.size(), 3u);
  }
}

TEST(TriangulateLinear, SingleObservation) {
  std::mt19937_64 rng(3);
  Instance in = random_instance(rng, 2, 0.0);
  in.track.observations.pop_back();
  EXPECT_EQ(code_of([&] { triangulate_linear(in.P, in.track); }), ErrorCode::InsufficientObservations);
}

TEST(TriangulateLinear, InvalidTracks) {
  std::mt19937_64 rng(4);
  Instance in = random_instance(rng, 3, 0.0);
  Track swapped = in.track;
  std::swap(swapped.observations[0], swapped.observations[1]);
  EXPECT_EQ(code_of([&] { triangulate_linear(in.P, swapped); }), ErrorCode::InvalidTrack);
  Track out_of_range = in.track;
  out_of_range.observations[2].view_index = 7;
  EXPECT_EQ(code_of([&] { triangulate_linear(in.P, out_of_range); }), ErrorCode::InvalidTrack);
}

// Two identical cameras displaced sideways observing the same pixel: the rays
// are parallel and meet at infinity.
std::vector<ProjectionMatrix> parallel_pair() {
  CameraView a;
  a.intrinsics = CameraIntrinsics::from_focal_pixels(800, 400, 300);
  CameraView b = a;
  b.center = Vec3(1.0, 0.0, 0.0);
  return {compose_projection(a), compose_projection(b)};
}

TEST(TriangulateLinear, PointAtInfinityIsReportedNotThrown) {
  const auto P = parallel_pair();
  const Track t{0, {{0, HomoPoint2(450, 320)}, {1, HomoPoint2(450, 320)}}};
  const TriangulationResult r = triangulate_linear(P, t);
  EXPECT_EQ(r.failure, TriangulationFailure::PointAtInfinity);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.ok());
}

TEST(TriangulateNViewLM, ParallelRaysFailInitialization) {
  const auto P = parallel_pair();
  const Track t{0, {{0, HomoPoint2(450, 320)}, {1, HomoPoint2(450, 320)}}};
  EXPECT_EQ(code_of([&] { triangulate_nview_lm(P, t); }), ErrorCode::InitializationFailed);
}

TEST(GeometricError, ExactTrackIsZero) {
  std::mt19937_64 rng(5);
  const Instance in = random_instance(rng, 3, 0.0);
  EXPECT_LT(geometric_error(in.P, in.X, in.track), 1e-18);
}

TEST(GeometricError, ThreeFourFive) {
  std::mt19937_64 rng(6);
  Instance in = random_instance(rng, 1, 0.0);
  auto& px = in.track.observations[0].pixel;
  px = HomoPoint2::from_euclidean(px.euclidean() + Vec2(3, 4));
  EXPECT_NEAR(geometric_error(in.P, in.X, in.track), 25.0, 1e-9);
}

TEST(GeometricError, MatchesIndependentEvaluation) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const Instance in = random_instance(rng, 3, 2.0);
    const Vec4 X(test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), 1.0);
    double expected = 0.0;
    for (const auto& obs : in.track.observations) {
      const Mat34& P = in.P[obs.view_index].P;
      const double w = P.row(2).dot(X);
      const double du = P.row(0).dot(X) / w - obs.pixel.u();
      const double dv = P.row(1).dot(X) / w - obs.pixel.v();
      expected += du * du + dv * dv;
    }
    EXPECT_NEAR(geometric_error(in.P, HomoPoint3(X), in.track), expected, 1e-12 * (1.0 + expected));
  }
}

TEST(TriangulationResult, ErrorIsSumOfSquaredResiduals) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const Instance in = random_instance(rng, 3, 1.0);
    for (const auto& r : {triangulate_linear(in.P, in.track), triangulate_nview_lm(in.P, in.track)}) {
      double sum = 0.0;
      for (double e : r.per_view_residual) sum += e * e;
      EXPECT_NEAR(r.geometric_error, sum, 1e-9 * r.geometric_error);
    }
  }
}

TEST(PencilCost, DerivativeNumeratorVanishesAtStationaryPoints) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const PencilCost s{test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -1, 1),
                       test::uniform(rng, -1, 1), test::uniform(rng, 0.1, 2), test::uniform(rng, 0.1, 2)};
    const Polynomial g = s.derivative_numerator();
    EXPECT_LE(g.degree(), 6);
    for (double t : real_roots(g)) {
      const double h = 1e-6 * (1.0 + std::abs(t));
      const double slope = (s(t + h) - s(t - h)) / (2 * h);
      EXPECT_LT(std::abs(slope), 1e-5 * (1.0 + s(t))) << "t=" << t;
    }
  }
}

TEST(PencilCost, AsymptoteIsTheLimit) {
  const PencilCost s{0.3, -0.7, 1.1, 0.2, 0.5, 1.3};
  EXPECT_NEAR(s(1e8), s.at_infinity(), 1e-7);
  EXPECT_NEAR(s(-1e8), s.at_infinity(), 1e-7);
}

TEST(HsCorrectPair, ConsistentPairIsUnchanged) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const Instance in = random_instance(rng, 2, 0.0);
    const Mat3 F = fundamental_from_projections(in.P[0], in.P[1]);
    const auto& x1 = in.track.observations[0].pixel;
    const auto& x2 = in.track.observations[1].pixel;
    const CorrectedPair c = hs_correct_pair(F, x1, x2);
    EXPECT_LT((c.x1.euclidean() - x1.euclidean()).norm(), 1e-9);
    EXPECT_LT((c.x2.euclidean() - x2.euclidean()).norm(), 1e-9);
    EXPECT_LT(c.cost, 1e-18);
  }
}

TEST(HsCorrectPair, OnePixelPerturbation) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    Instance in = random_instance(rng, 2, 0.0);
    const Mat3 F = fundamental_from_projections(in.P[0], in.P[1]);
    const double angle = test::uniform(rng, 0, 2 * M_PI);
    auto& x2 = in.track.observations[1].pixel;
    x2 = HomoPoint2::from_euclidean(x2.euclidean() + Vec2(std::cos(angle), std::sin(angle)));
    const auto& x1 = in.track.observations[0].pixel;
    const CorrectedPair c = hs_correct_pair(F, x1, x2);
    EXPECT_LT(epipolar_residual(F, c.x1, c.x2), 1e-8);
    EXPECT_LE(c.cost, 1.0 + 1e-9);
    const double moved = (c.x1.euclidean() - x1.euclidean()).squaredNorm() +
                         (c.x2.euclidean() - x2.euclidean()).squaredNorm();
    EXPECT_NEAR(moved, c.cost, 1e-9 * (1.0 + c.cost));
  }
}

TEST(HsCorrectPair, MatchesGridOracle) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const Instance in = random_instance(rng, 2, 1.0);
    const Mat3 F = fundamental_from_projections(in.P[0], in.P[1]);
    const auto& x1 = in.track.observations[0].pixel;
    const auto& x2 = in.track.observations[1].pixel;
    const CorrectedPair c = hs_correct_pair(F, x1, x2);
    const auto oracle = test::PencilOracle(F, x1, x2).grid_minimum(200000);
    EXPECT_LE(std::abs(c.cost - oracle.cost), 1e-6 * oracle.cost) << "instance " << i;
  }
}

TEST(HsCorrectPair, AsymptoticSolution) {
  // Canonical configuration whose cost decreases monotonically in |t|.
  const PencilCost s{1.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  Mat3 F;
  F << s.f1 * s.f2 * s.d, -s.f2 * s.c, -s.f2 * s.d,
       -s.f1 * s.b, s.a, s.b,
       -s.f1 * s.d, s.c, s.d;
  const CorrectedPair c = hs_correct_pair(F, HomoPoint2(0, 0), HomoPoint2(0, 0));
  const auto oracle = test::PencilOracle(F, HomoPoint2(0, 0), HomoPoint2(0, 0)).grid_minimum(100000);
  EXPECT_LE(c.cost, oracle.cost * (1 + 1e-9));
  EXPECT_LT(epipolar_residual(F, c.x1, c.x2), 1e-8);
}

TEST(HsCorrectPair, EpipoleAtPoint) {
  // Forward motion along the optical axis: both epipoles sit exactly at the
  // image origin, F = [(0, 0, 1)]x.
  const Mat3 F = cross_matrix(Vec3(0, 0, 1));
  EXPECT_EQ(code_of([&] { hs_correct_pair(F, HomoPoint2(0, 0), HomoPoint2(3, 4)); }),
            ErrorCode::EpipoleAtPoint);
  EXPECT_EQ(code_of([&] { hs_correct_pair(F, HomoPoint2(3, 4), HomoPoint2(0, 0)); }),
            ErrorCode::EpipoleAtPoint);
  EXPECT_NO_THROW(hs_correct_pair(F, HomoPoint2(1e-6, 0), HomoPoint2(3, 4)));
}

TEST(HsCorrectPair, RankDeficientF) {
  const HomoPoint2 x(1, 2);
  EXPECT_EQ(code_of([&] { hs_correct_pair(Mat3::Identity(), x, x); }), ErrorCode::RankDeficientF);
  Mat3 rank_one = Mat3::Zero();
  rank_one(0, 0) = 1.0;
  EXPECT_EQ(code_of([&] { hs_correct_pair(rank_one, x, x); }), ErrorCode::RankDeficientF);
}

TEST(TwoViewOptimal, NoiseFreeMatchesLinear) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 100; ++i) {
    const Instance in = random_instance(rng, 2, 0.0);
    const auto& o = in.track.observations;
    const TriangulationResult opt = triangulate_two_view_optimal(in.P[0], in.P[1], o[0].pixel, o[1].pixel);
    const TriangulationResult lin = triangulate_linear(in.P, in.track);
    EXPECT_EQ(opt.method, TriangulationMethod::TwoViewOptimal);
    EXPECT_LT((opt.point.euclidean() - lin.point.euclidean()).norm(), 1e-9);
  }
}

TEST(TwoViewOptimal, DominatesLinear) {
  std::mt19937_64 rng(15);
  double opt_sum = 0.0;
  double lin_sum = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Instance in = random_instance(rng, 2, 1.0);
    const auto& o = in.track.observations;
    const TriangulationResult opt = triangulate_two_view_optimal(in.P[0], in.P[1], o[0].pixel, o[1].pixel);
    const TriangulationResult lin = triangulate_linear(in.P, in.track);
    EXPECT_LE(opt.geometric_error, lin.geometric_error + 1e-9) << "trial " << i;
    opt_sum += opt.geometric_error;
    lin_sum += lin.geometric_error;
  }
  EXPECT_LE(opt_sum, lin_sum);
}

TEST(TwoViewOptimal, ErrorAgainstOriginalObservationsEqualsCorrectionCost) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 100; ++i) {
    const Instance in = random_instance(rng, 2, 1.0);
    const auto& o = in.track.observations;
    const Mat3 F = fundamental_from_projections(in.P[0], in.P[1]);
    const CorrectedPair c = hs_correct_pair(F, o[0].pixel, o[1].pixel);
    const TriangulationResult r = triangulate_two_view_optimal(in.P[0], in.P[1], o[0].pixel, o[1].pixel);
    EXPECT_NEAR(r.geometric_error, c.cost, 1e-8 * (1.0 + c.cost));
  }
}

TEST(NViewLM, NoiseFreeThreeViews) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const Instance in = random_instance(rng, 3, 0.0);
    const TriangulationResult r = triangulate_nview_lm(in.P, in.track);
    EXPECT_EQ(r.method, TriangulationMethod::NViewLM);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 3);
    EXPECT_LT((r.point.euclidean() - in.X.euclidean()).norm(), 1e-9);
  }
}

TEST(NViewLM, DominatesLinearInitializer) {
  std::mt19937_64 rng(18);
  for (int i = 0; i < 500; ++i) {
    const Instance in = random_instance(rng, 2 + i % 4, 1.0);
    const TriangulationResult lin = triangulate_linear(in.P, in.track);
    const TriangulationResult lm = triangulate_nview_lm(in.P, in.track);
    EXPECT_LE(lm.geometric_error, lin.geometric_error + 1e-12) << "trial " << i;
  }
}

TEST(NViewLM, TwoViewsAgreeWithOptimalCorrection) {
  std::mt19937_64 rng(19);
  int agree = 0;
  for (int i = 0; i < 500; ++i) {
    const Instance in = random_instance(rng, 2, 1.0);
    const auto& o = in.track.observations;
    const double opt = triangulate_two_view_optimal(in.P[0], in.P[1], o[0].pixel, o[1].pixel).geometric_error;
    const double lm = triangulate_nview_lm(in.P, in.track).geometric_error;
    if (std::abs(lm - opt) <= 1e-6) ++agree;
  }
  EXPECT_GE(agree, 475);
}

TEST(Triangulation, ProjectiveScaleInvariance) {
  std::mt19937_64 rng(20);
  for (int i = 0; i < 50; ++i) {
    Instance in = random_instance(rng, 3, 1.0);
    std::vector<ProjectionMatrix> scaled = in.P;
    for (auto& P : scaled) P.P *= test::uniform(rng, 0.01, 100.0) * (rng() % 2 ? 1.0 : -1.0);
    const auto& o = in.track.observations;
    const Track pair{0, {o[0], o[1]}};
    auto dist = [](const TriangulationResult& a, const TriangulationResult& b) {
      return (a.point.euclidean() - b.point.euclidean()).norm();
    };
    EXPECT_LT(dist(triangulate_linear(in.P, in.track), triangulate_linear(scaled, in.track)), 1e-9);
    EXPECT_LT(dist(triangulate_nview_lm(in.P, in.track), triangulate_nview_lm(scaled, in.track)), 1e-9);
    EXPECT_LT(dist(triangulate_two_view_optimal(in.P[0], in.P[1], o[0].pixel, o[1].pixel),
                   triangulate_two_view_optimal(scaled[0], scaled[1], o[0].pixel, o[1].pixel)),
              1e-9);
  }
}

TEST(RayMidpoint, ExactRaysMeetAtThePoint) {
  std::mt19937_64 rng(21);
  const Instance in = random_instance(rng, 2, 0.0);
  EXPECT_LT((ray_midpoint(in.P, in.track) - in.X.euclidean()).norm(), 1e-9);
}

TEST(DegreeConjecture, KnownValues) {
  EXPECT_EQ(degree_conjecture(2), 6);
  EXPECT_EQ(degree_conjecture(3), 47);
  EXPECT_EQ(degree_conjecture(4), 148);
  // 9/2 n^3 - 21/2 n^2 + 8n - 4 evaluated in floating point for moderate n.
  for (int n = 2; n <= 200; ++n) {
    const double v = 4.5 * n * n * n - 10.5 * n * n + 8.0 * n - 4.0;
    EXPECT_EQ(static_cast<double>(degree_conjecture(n)), v);
  }
}

TEST(DegreeConjecture, DomainError) {
  EXPECT_EQ(code_of([] { degree_conjecture(1); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { degree_conjecture(-3); }), ErrorCode::DomainError);
}

TEST(ParseMethod, CliSpellings) {
  for (auto m : {TriangulationMethod::Linear, TriangulationMethod::TwoViewOptimal, TriangulationMethod::NViewLM}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_EQ(code_of([] { parse_method("midpoint"); }), ErrorCode::ConfigError);
}

}  // namespace
}  // namespace mvtri
