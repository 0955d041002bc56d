#include <cstdio>
#include <filesystem>
#include <fstream>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "mvtri/error.hpp"
#include "mvtri/scene.hpp"
#include "mvtri/scene_io.hpp"

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

ObjectModel random_box(int n, Vec3 extents, std::uint64_t seed = 1) {
  ObjectModel m;
  m.kind = ObjectKind::RandomBox;
  m.point_count = n;
  m.extents_cm = extents;
  m.seed = seed;
  return m;
}

TEST(MakeObject, PlanarGridCorners) {
  ObjectModel m;
  m.grid_rows = 3;
  m.grid_cols = 3;
  const auto pts = make_object(m);
  ASSERT_EQ(pts.size(), 9u);
  for (const auto& corner : {Vec3(-5, -5, 0), Vec3(5, -5, 0), Vec3(-5, 5, 0), Vec3(5, 5, 0)}) {
    const bool found = std::any_of(pts.begin(), pts.end(),
                                   [&](const HomoPoint3& p) { return (p.euclidean() - corner).norm() < 1e-12; });
    EXPECT_TRUE(found) << corner.transpose();
  }
  for (const auto& p : pts) EXPECT_EQ(p.euclidean().z(), 0.0);
}

TEST(MakeObject, RandomBoxIsDeterministic) {
  EXPECT_EQ(make_object(random_box(100, Vec3(10, 10, 10))), make_object(random_box(100, Vec3(10, 10, 10))));
  EXPECT_NE(make_object(random_box(100, Vec3(10, 10, 10), 1)), make_object(random_box(100, Vec3(10, 10, 10), 2)));
}

TEST(MakeObject, RandomBoxBounds) {
  for (const auto& p : make_object(random_box(1000, Vec3(2, 2, 2)))) {
    EXPECT_LE(p.euclidean().cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(MakeObject, TooFewPoints) {
  EXPECT_EQ(code_of([] { make_object(random_box(7, Vec3(1, 1, 1))); }), ErrorCode::InvalidSpec);
}

TEST(AngleRig, StudyConfigurations) {
  for (auto [left, right] : {std::pair{5.33, 16.79}, std::pair{10.72, 8.74}}) {
    RigSpec spec;
    spec.left_angle_deg = left;
    spec.right_angle_deg = right;
    const auto views = make_angle_rig(spec);
    ASSERT_EQ(views.size(), 3u);
    const Vec3 axis = views[1].center.normalized();
    EXPECT_NEAR(std::acos(axis.dot(views[0].center.normalized())) * 180 / M_PI, left, 1e-10);
    EXPECT_NEAR(std::acos(axis.dot(views[2].center.normalized())) * 180 / M_PI, right, 1e-10);
    // Left camera on the negative x side.
    EXPECT_LT(views[0].center.x(), 0.0);
    EXPECT_GT(views[2].center.x(), 0.0);
  }
}

TEST(AngleRig, CirclePlacementAndAim) {
  RigSpec spec;
  for (const auto& view : make_angle_rig(spec)) {
    EXPECT_NEAR(view.center.norm(), 21.0, 1e-12);
    EXPECT_NEAR(view.center.y(), 0.0, 1e-15);
    const ImagePoint c = project(view, HomoPoint3(0, 0, 0, 1));
    EXPECT_LT((c.point.euclidean() - Vec2(1920, 1080)).norm(), 0.5);
    EXPECT_EQ(view.intrinsics.a, 0.0);
  }
}

TEST(AngleRig, InvalidAngles) {
  RigSpec spec;
  spec.left_angle_deg = 90.0;
  EXPECT_EQ(code_of([&] { make_angle_rig(spec); }), ErrorCode::InvalidSpec);
  spec.left_angle_deg = 0.0;
  EXPECT_EQ(code_of([&] { make_angle_rig(spec); }), ErrorCode::InvalidSpec);
}

RigSpec distance_spec(std::array<double, 3> offsets) {
  RigSpec spec;
  spec.kind = RigKind::DistanceStudy;
  spec.camera_offsets_cm = offsets;
  return spec;
}

TEST(DistanceRig, StudyPlacements) {
  const auto best = make_distance_rig(distance_spec({1.73, 5.33, 7.2}));
  EXPECT_NEAR(best[1].center.x(), 0.0, 1e-15);  // the bisector station
  EXPECT_NEAR(best[0].center.x(), 1.73 - 5.33, 1e-12);
  EXPECT_NEAR(best[2].center.x(), 7.2 - 5.33, 1e-12);
  const auto worst = make_distance_rig(distance_spec({0.0, 1.73, 3.46}));
  EXPECT_NEAR(worst[0].center.x(), -5.33, 1e-12);
  for (const auto& v : worst) EXPECT_NEAR(v.center.z(), 21.0, 1e-15);
}

TEST(DistanceRig, CentersCollinear) {
  for (std::size_t i = 0; i < kDistanceStations.size(); ++i) {
    for (std::size_t j = i + 1; j < kDistanceStations.size(); ++j) {
      for (std::size_t k = j + 1; k < kDistanceStations.size(); ++k) {
        const auto v = make_distance_rig(
            distance_spec({kDistanceStations[i], kDistanceStations[j], kDistanceStations[k]}));
        const Vec3 d1 = v[1].center - v[0].center;
        const Vec3 d2 = v[2].center - v[0].center;
        EXPECT_LT(d1.cross(d2).norm(), 1e-12);
      }
    }
  }
}

TEST(DistanceRig, OffsetsMustIncrease) {
  EXPECT_EQ(code_of([] { make_distance_rig(distance_spec({1.73, 1.73, 3.46})); }), ErrorCode::InvalidSpec);
  EXPECT_EQ(code_of([] { make_distance_rig(distance_spec({3.46, 1.73, 5.33})); }), ErrorCode::InvalidSpec);
}

TEST(Resolution, Presets) {
  EXPECT_EQ(*resolution_preset("low"), (Resolution{480, 320}));
  EXPECT_EQ(*resolution_preset("fullhd"), (Resolution{1920, 1080}));
  EXPECT_EQ(*resolution_preset("ultrahd"), (Resolution{3840, 2160}));
  EXPECT_EQ(*resolution_preset("native"), (Resolution{4032, 3024}));
  EXPECT_FALSE(resolution_preset("8k"));
  EXPECT_EQ(preset_name({1920, 1080}), "fullhd");
  EXPECT_EQ(preset_name({1000, 1000}), "");
  EXPECT_DOUBLE_EQ(focal_for_resolution(kNativeResolution), kNativeFocalPixels);
  EXPECT_DOUBLE_EQ(focal_for_resolution({2016, 1512}), kNativeFocalPixels / 2);
}

TEST(RenderTracks, ExactProjectionsWithoutNoise) {
  const auto points = make_object(ObjectModel{});
  const auto views = make_rig(RigSpec{});
  const auto tracks = render_tracks(views, points, NoiseModel{});
  ASSERT_EQ(tracks.size(), points.size());
  for (const auto& t : tracks) {
    ASSERT_EQ(t.observations.size(), 3u);
    std::vector<ProjectionMatrix> P;
    for (const auto& v : views) P.push_back(compose_projection(v));
    const TriangulationResult r = triangulate_linear(P, t);
    EXPECT_LT((r.point.euclidean() - points[t.point_id].euclidean()).norm(), 1e-9);
    for (const auto& o : t.observations) {
      const Vec2 exact = project(views[o.view_index], points[t.point_id]).point.euclidean();
      EXPECT_LT((o.pixel.euclidean() - exact).norm(), 1e-9);
    }
  }
}

TEST(RenderTracks, QuantizationBound) {
  const auto points = make_object(random_box(500, Vec3(10, 10, 10)));
  const auto views = make_rig(RigSpec{});
  NoiseModel noise;
  noise.quantize = true;
  for (const auto& t : render_tracks(views, points, noise)) {
    for (const auto& o : t.observations) {
      const Vec2 exact = project(views[o.view_index], points[t.point_id]).point.euclidean();
      const Vec2 d = o.pixel.euclidean() - exact;
      EXPECT_LE(d.cwiseAbs().maxCoeff(), 0.5);
      EXPECT_LE(d.norm(), 0.5 * std::sqrt(2.0));
      EXPECT_EQ(o.pixel.u() - std::floor(o.pixel.u()), 0.5);
    }
  }
}

double mean_angular_quantization_error(const Resolution& res) {
  RigSpec rig;
  rig.resolution = res;
  rig.focal_pixels = focal_for_resolution(res);
  const auto views = make_rig(rig);
  const auto points = make_object(random_box(10000, Vec3(10, 10, 10), 5));
  NoiseModel noise;
  noise.quantize = true;
  double sum = 0.0;
  int n = 0;
  for (const auto& t : render_tracks(views, points, noise)) {
    for (const auto& o : t.observations) {
      const Vec2 exact = project(views[o.view_index], points[t.point_id]).point.euclidean();
      sum += (o.pixel.euclidean() - exact).norm() / rig.focal_pixels;
      ++n;
    }
  }
  return sum / n;
}

TEST(RenderTracks, DoublingResolutionHalvesAngularQuantizationError) {
  const double coarse = mean_angular_quantization_error({1920, 1080});
  const double fine = mean_angular_quantization_error({3840, 2160});
  EXPECT_NEAR(fine / coarse, 0.5, 0.02);
}

TEST(RenderTracks, VisibilityAndMinimumTrackLength) {
  RigSpec rig;
  rig.resolution = {480, 320};
  rig.focal_pixels = 200;  // wide enough that most, but not all, points fit
  const auto points = make_object(random_box(2000, Vec3(40, 40, 10), 3));
  NoiseModel noise;
  noise.sigma_px = 3.0;
  noise.detect_prob = 0.7;
  noise.seed = 4;
  const auto views = make_rig(rig);
  const auto tracks = render_tracks(views, points, noise);
  EXPECT_LT(tracks.size(), points.size());
  for (const auto& t : tracks) {
    EXPECT_GE(t.observations.size(), 2u);
    for (const auto& o : t.observations) {
      EXPECT_TRUE(views[o.view_index].contains(o.pixel.euclidean()));
    }
  }
}

TEST(RenderTracks, DetectionProbability) {
  const auto points = make_object(random_box(3000, Vec3(10, 10, 10)));
  const auto views = make_rig(RigSpec{});
  NoiseModel noise;
  noise.detect_prob = 0.8;
  noise.seed = 9;
  std::size_t observations = 0;
  for (const auto& t : render_tracks(views, points, noise)) observations += t.observations.size();
  // Expected count: 3 views x p, minus single-observation tracks that are dropped.
  const double p = 0.8;
  const double expected = points.size() * (3 * p - 3 * p * (1 - p) * (1 - p));
  EXPECT_NEAR(observations / expected, 1.0, 0.03);
}

TEST(RenderTracks, SigmaSharesNoiseRealization) {
  const auto points = make_object(ObjectModel{});
  const auto views = make_rig(RigSpec{});
  NoiseModel a, b;
  a.sigma_px = 1.0;
  b.sigma_px = 2.0;
  a.seed = b.seed = 42;
  const auto ta = render_tracks(views, points, a);
  const auto tb = render_tracks(views, points, b);
  const auto exact = render_tracks(views, points, NoiseModel{});
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    for (std::size_t k = 0; k < ta[i].observations.size(); ++k) {
      const Vec2 e = exact[i].observations[k].pixel.euclidean();
      const Vec2 da = ta[i].observations[k].pixel.euclidean() - e;
      const Vec2 db = tb[i].observations[k].pixel.euclidean() - e;
      EXPECT_LT((2.0 * da - db).norm(), 1e-9);
    }
  }
}

TEST(SimulateScene, DeterministicSerialization) {
  ObjectModel object = random_box(200, Vec3(10, 10, 10), 7);
  NoiseModel noise{.sigma_px = 0.7, .quantize = true, .detect_prob = 0.9, .seed = 99};
  RigSpec rig = distance_spec({0.0, 5.33, 10.93});
  const std::string first = dump_scene(simulate_scene(object, rig, noise));
  const std::string second = dump_scene(simulate_scene(object, rig, noise));
  EXPECT_EQ(first, second);
  noise.seed = 100;
  EXPECT_NE(first, dump_scene(simulate_scene(object, rig, noise)));
}

TEST(SceneIo, RoundTripThroughFile) {
  NoiseModel noise{.sigma_px = 0.5, .quantize = false, .detect_prob = 0.8, .seed = 3};
  const SyntheticScene scene = simulate_scene(ObjectModel{}, RigSpec{}, noise);
  const auto path = std::filesystem::temp_directory_path() / "mvtri_scene_roundtrip.json";
  write_scene_file(scene, path.string());
  const SceneData back = read_scene_file(path.string());
  std::filesystem::remove(path);

  const SceneData direct = to_scene_data(scene);
  ASSERT_EQ(back.views.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT((back.views[i].P - direct.views[i].P).norm(), 1e-12 * direct.views[i].P.norm());
  }
  EXPECT_EQ(back.image_sizes, direct.image_sizes);
  EXPECT_EQ(back.tracks, scene.tracks);
  ASSERT_EQ(back.ground_truth.size(), scene.ground_truth.size());
  EXPECT_EQ(back.provenance, direct.provenance);
  EXPECT_EQ(object_from_json(back.provenance["object"]), scene.object);
  EXPECT_EQ(rig_from_json(back.provenance["rig"]), scene.rig);
  EXPECT_EQ(noise_from_json(back.provenance["noise"]), scene.noise);
}

TEST(SceneIo, ExternalDataWithoutGroundTruth) {
  const auto j = nlohmann::json::parse(R"({
    "views": [{"P": [1,0,0,0, 0,1,0,0, 0,0,1,0], "width": 100, "height": 100},
              {"P": [1,0,0,-1, 0,1,0,0, 0,0,1,0], "width": 100, "height": 100}],
    "tracks": [{"point_id": 0, "observations": [[0, 0.1, 0.2], [1, -0.1, 0.2]]}]
  })");
  const SceneData s = scene_from_json(j);
  EXPECT_TRUE(s.ground_truth.empty());
  const TriangulationResult r = triangulate_linear(s.views, s.tracks[0]);
  EXPECT_LT((r.point.euclidean() - Vec3(0.5, 1.0, 5.0)).norm(), 1e-12);
}

TEST(SceneIo, UnknownFieldRejected) {
  const auto j = nlohmann::json::parse(R"({"views": [], "tracks": [], "extra": 1})");
  EXPECT_EQ(code_of([&] { scene_from_json(j); }), ErrorCode::ParseError);
}

TEST(SceneIo, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { read_scene_file("/nonexistent/scene.json"); }), ErrorCode::IoError);
}

TEST(SpecJson, RangeViolationIsValidationError) {
  EXPECT_EQ(code_of([] { noise_from_json(nlohmann::json{{"sigma_px", -1.0}}); }), ErrorCode::ValidationError);
  EXPECT_EQ(code_of([] { noise_from_json(nlohmann::json{{"detect_prob", 1.5}}); }), ErrorCode::ValidationError);
  EXPECT_EQ(code_of([] { rig_from_json(nlohmann::json{{"resolution", "8k"}}); }), ErrorCode::ValidationError);
  EXPECT_EQ(code_of([] { noise_from_json(nlohmann::json{{"sigma_px", "big"}}); }), ErrorCode::ParseError);
}

TEST(SpecJson, ResolutionPresetRescalesFocal) {
  const RigSpec rig = rig_from_json(nlohmann::json{{"resolution", "fullhd"}});
  EXPECT_EQ(rig.resolution, (Resolution{1920, 1080}));
  EXPECT_DOUBLE_EQ(rig.focal_pixels, focal_for_resolution({1920, 1080}));
}

}  // namespace
}  // namespace mvtri
