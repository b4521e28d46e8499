/* Copyright 2026 The ShadowForge Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */
#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "shadowforge/eval/asr.hpp"
#include "shadowforge/eval/bridge.hpp"
#include "shadowforge/eval/sticker.hpp"
#include "shadowforge/objective/template_detector.hpp"
#include "shadowforge/scene/synthetic.hpp"
#include "test_util.hpp"

namespace sf = shadowforge;

namespace {

// Small box that stays in front of the camera and inside the frame at every
// default grid node.
const sf::CarModel& small_box() {
  static const sf::CarModel m = [] {
    sf::BoxModelOptions o;
    o.half_extent = {0.15, 0.1, 0.25};
    return sf::make_box_model(o);
  }();
  return m;
}

// Bounding box of every pixel that differs from the top-left corner.
std::optional<sf::BBox> foreground_box(const sf::Image& img) {
  const double bg = img.at(0, 0);
  int x1 = img.width, y1 = img.height, x2 = -1, y2 = -1;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y) != bg) {
        x1 = std::min(x1, x);
        y1 = std::min(y1, y);
        x2 = std::max(x2, x);
        y2 = std::max(y2, y);
      }
  if (x2 < 0) return std::nullopt;
  return sf::BBox{double(x1), double(y1), double(x2), double(y2)};
}

struct GroundTruthStub : sf::Detector {
  std::vector<sf::Detection> evaluate(const sf::Image& img) const override {
    const auto b = foreground_box(img);
    if (!b) return {};
    return {{*b, 0.99, "car"}};
  }
};

struct NothingStub : sf::Detector {
  std::vector<sf::Detection> evaluate(const sf::Image&) const override { return {}; }
};

// Relies on the documented view order (azim, then elev, then dist) and a
// single worker.
struct CountingStub : sf::Detector {
  std::function<bool(int)> fires;
  mutable std::atomic<int> calls{0};
  std::vector<sf::Detection> evaluate(const sf::Image& img) const override {
    const int k = calls++;
    if (!fires(k)) return {};
    return GroundTruthStub{}.evaluate(img);
  }
};

sf::AsrOptions one_worker() {
  sf::AsrOptions o;
  o.workers = 1;
  return o;
}

class FixtureServer {
 public:
  explicit FixtureServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/detect", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FixtureServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

sf::BridgeOptions fast_retries() {
  sf::BridgeOptions o;
  o.backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(2);
  return o;
}

const char* kFixtureResponse =
    R"({"detections":[{"x1":3,"y1":4,"x2":20.5,"y2":30,"score":0.82,"label":"car"},)"
    R"({"x1":0,"y1":0,"x2":5,"y2":5,"score":0.4,"label":"person"}],"model":"fixture"})";

}  // namespace

TEST(Grid, DefaultHas2304Views) {
  const auto g = sf::default_grid();
  EXPECT_EQ(g.azim.size(), 18u);
  EXPECT_EQ(g.elev.size(), 16u);
  EXPECT_EQ(g.dist.size(), 8u);
  EXPECT_EQ(g.size(), 2304u);
  EXPECT_EQ(g.azim.back(), 340.0);
  EXPECT_EQ(g.elev.back(), 90.0);
  EXPECT_EQ(g.dist.front(), 1.0);
  EXPECT_EQ(g.dist.back(), 8.0);
  for (const auto& c : g.views()) EXPECT_NO_THROW(sf::validate(c));
}

TEST(Grid, ReducedIsSixBySixByThree) {
  const auto g = sf::reduced_grid();
  EXPECT_EQ(g.size(), 108u);
  EXPECT_NO_THROW(sf::validate(g));
}

TEST(Grid, ViewOrderIsAzimElevDist) {
  const sf::EvalGrid g{{0, 90}, {0, 45}, {2, 4}};
  const auto v = g.views();
  ASSERT_EQ(v.size(), 8u);
  EXPECT_EQ(v[1].dist, 4.0);
  EXPECT_EQ(v[2].elev, 45.0);
  EXPECT_EQ(v[4].azim, 90.0);
}

TEST(Grid, JsonRoundTripAndValidation) {
  const auto g = sf::default_grid();
  EXPECT_EQ(sf::grid_from_json(sf::to_json(g)), g);
  EXPECT_THROW(sf::grid_from_json({{"azim", {360}}, {"elev", {0}}, {"dist", {1}}}), sf::DomainError);
  EXPECT_THROW(sf::grid_from_json({{"azim", {0, 0}}, {"elev", {0}}, {"dist", {1}}}), sf::DomainError);
  EXPECT_THROW(sf::grid_from_json({{"azim", {0}}, {"elev", {91}}, {"dist", {1}}}), sf::DomainError);
  EXPECT_THROW(sf::grid_from_json({{"azim", {0}}, {"elev", {0}}}), sf::DomainError);
  EXPECT_THROW(sf::resolve_grid("/nonexistent/grid.json"), sf::AssetError);
}

TEST(Asr, GroundTruthStubGivesZero) {
  const auto r = sf::compute_asr(small_box(), small_box().texture, GroundTruthStub{}, sf::default_grid(), one_worker());
  EXPECT_EQ(r.excluded, 0);
  EXPECT_EQ(r.counted, 2304);
  EXPECT_EQ(r.asr(), 0.0);
}

TEST(Asr, NothingStubGivesOne) {
  const auto r = sf::compute_asr(small_box(), small_box().texture, NothingStub{}, sf::reduced_grid());
  EXPECT_EQ(r.asr(), 1.0);
  EXPECT_EQ(r.undetected, r.counted);
}

TEST(Asr, LowElevationStubMatchesHandCount) {
  CountingStub stub;
  stub.fires = [](int k) { return (k / 8) % 16 < 5; };  // elev index < 5 means elev < 30
  const auto r = sf::compute_asr(small_box(), small_box().texture, stub, sf::default_grid(), one_worker());
  EXPECT_EQ(r.excluded, 0);
  EXPECT_EQ(r.asr(), 1.0 - (5.0 * 18 * 8) / 2304.0);
  for (const auto& v : r.views) EXPECT_EQ(v.detected, v.camera.elev < 30);
  for (const auto& m : r.by_elev) EXPECT_EQ(m.asr(), m.value < 30 ? 0.0 : 1.0);
}

TEST(Asr, ThresholdsApplied) {
  struct Weak : sf::Detector {
    double score, shrink;
    Weak(double s, double k) : score(s), shrink(k) {}
    std::vector<sf::Detection> evaluate(const sf::Image& img) const override {
      auto b = *foreground_box(img);
      b.x2 = b.x1 + shrink * (b.x2 - b.x1);
      return {{b, score, "car"}};
    }
  };
  const sf::EvalGrid g{{0, 120}, {20}, {3}};
  EXPECT_EQ(sf::compute_asr(small_box(), small_box().texture, Weak(0.59, 1.0), g).asr(), 1.0);
  EXPECT_EQ(sf::compute_asr(small_box(), small_box().texture, Weak(0.6, 1.0), g).asr(), 0.0);
  EXPECT_EQ(sf::compute_asr(small_box(), small_box().texture, Weak(0.9, 0.2), g).asr(), 1.0);
}

TEST(Asr, AddingDetectionsNeverRaisesAsr) {
  const auto grid = sf::reduced_grid();
  sf::Rng rng(3);
  std::vector<bool> base(grid.size()), more(grid.size());
  for (size_t k = 0; k < base.size(); ++k) {
    base[k] = sf::uniform01(rng) < 0.3;
    more[k] = base[k] || sf::uniform01(rng) < 0.3;
  }
  CountingStub a, b;
  a.fires = [&](int k) { return bool(base[k]); };
  b.fires = [&](int k) { return bool(more[k]); };
  const double ra = sf::compute_asr(small_box(), small_box().texture, a, grid, one_worker()).asr();
  const double rb = sf::compute_asr(small_box(), small_box().texture, b, grid, one_worker()).asr();
  EXPECT_LE(rb, ra);
  EXPECT_LT(rb, ra);
}

TEST(Asr, MarginalsRecomputeFromRecords) {
  CountingStub stub;
  stub.fires = [](int k) { return k % 3 == 0; };
  const auto grid = sf::reduced_grid();
  const auto r = sf::compute_asr(small_box(), small_box().texture, stub, grid, one_worker());
  auto copy = r;
  copy.by_azim.clear();
  copy.by_elev.clear();
  copy.by_dist.clear();
  copy.counted = copy.undetected = -1;
  sf::summarize(copy, grid);
  EXPECT_EQ(sf::to_json(copy), sf::to_json(r));
  for (const auto& m : r.by_azim) {
    int counted = 0, missed = 0;
    for (const auto& v : r.views)
      if (v.camera.azim == m.value && v.status == sf::ViewStatus::kCounted) {
        ++counted;
        missed += v.detected ? 0 : 1;
      }
    EXPECT_EQ(m.counted, counted);
    EXPECT_EQ(m.undetected, missed);
  }
}

TEST(Asr, DeterministicAcrossWorkers) {
  const auto& m = sf::load_model(sftest::asset("demo_car/model.json"));
  const auto det = sf::build_template_detector(m.mesh, m.texture, m.calibration_view, m.background);
  const sf::EvalGrid g{{0, 60, 120}, {0, 36}, {4, 8}};
  sf::AsrOptions o1 = one_worker(), o4;
  o4.workers = 4;
  const auto a = sf::compute_asr(m, m.texture, det, g, o1);
  const auto b = sf::compute_asr(m, m.texture, det, g, o4);
  EXPECT_EQ(sf::to_json(a), sf::to_json(b));
}

TEST(Asr, OutOfFrameViewsExcluded) {
  sf::BoxModelOptions o;
  o.half_extent = {0.15, 0.1, 0.25};
  auto m = sf::make_box_model(o);
  // Unreferenced vertices drag the camera target 50 m away from the box.
  const size_t n = m.mesh.vertices.size();
  for (size_t i = 0; i < 4 * n; ++i) m.mesh.vertices.push_back({62.5, 0.0, 0.0});
  const auto r = sf::compute_asr(m, m.texture, NothingStub{}, sf::EvalGrid{{0}, {10}, {2, 3}});
  EXPECT_EQ(r.excluded, 2);
  EXPECT_EQ(r.counted, 0);
}

TEST(Asr, DetectorErrorsMarkViews) {
  struct Throwing : sf::Detector {
    std::vector<sf::Detection> evaluate(const sf::Image&) const override { throw sf::SchemaError("bad", "{}"); }
  };
  const auto r = sf::compute_asr(small_box(), small_box().texture, Throwing{}, sf::EvalGrid{{0, 90}, {10}, {3}});
  EXPECT_EQ(r.errored, 2);
  EXPECT_EQ(r.counted, 0);
}

TEST(Asr, TextureSizeChecked) {
  EXPECT_THROW(sf::compute_asr(small_box(), sf::Image(5, 5), NothingStub{}, sf::reduced_grid()), sf::DomainError);
}

TEST(Asr, ReportFiles) {
  sftest::TempDir dir("asr");
  const auto grid = sf::EvalGrid{{0, 90, 180}, {0, 30}, {3}};
  const auto r = sf::compute_asr(small_box(), small_box().texture, GroundTruthStub{}, grid);
  sf::write_report(r, grid, dir.path());
  for (const char* f : {"asr_report.json", "asr_by_azim.csv", "asr_by_elev.csv", "asr_by_dist.csv", "asr_heatmap.png"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const auto j = sf::json_from_file(dir / "asr_report.json");
  EXPECT_EQ(j["views"].size(), 6u);
}

TEST(Bridge, Base64RoundTrip) {
  for (const std::string& s : std::vector<std::string>{"", "a", "ab", "abc", "abcd", std::string("\0\xff\x10", 3)})
    EXPECT_EQ(sf::base64_decode(sf::base64_encode(s)), s);
  EXPECT_EQ(sf::base64_encode("Man"), "TWFu");
  EXPECT_EQ(sf::base64_encode("Ma"), "TWE=");
}

TEST(Bridge, FixtureRoundTrip) {
  sf::Image sent(12, 7);
  for (size_t i = 0; i < sent.size(); ++i) sent.data[i] = (i * 37 % 256) / 255.0;
  sf::Image received;
  double threshold = -1;
  FixtureServer server([&](const httplib::Request& req, httplib::Response& res) {
    const auto j = nlohmann::json::parse(req.body);
    received = sf::decode_png(sf::base64_decode(j["image_png_base64"].get<std::string>()));
    threshold = j["score_threshold"].get<double>();
    res.set_content(kFixtureResponse, "application/json");
  });
  const auto r = sf::detect_remote_full(server.url(), sent, 0.25, fast_retries());
  EXPECT_EQ(received, sent);
  EXPECT_EQ(threshold, 0.25);
  EXPECT_EQ(r.model, "fixture");
  ASSERT_EQ(r.detections.size(), 2u);
  EXPECT_EQ(r.detections[0].box, (sf::BBox{3, 4, 20.5, 30}));
  EXPECT_EQ(r.detections[0].score, 0.82);
  EXPECT_EQ(r.detections[1].label, "person");
  EXPECT_EQ(sf::to_json(r), nlohmann::json::parse(kFixtureResponse));

  const sf::BridgeDetector det(server.url() + "/", 0.05, fast_retries());
  const auto cars = det.evaluate(sent);
  ASSERT_EQ(cars.size(), 1u);
  EXPECT_EQ(cars[0].label, "car");
}

TEST(Bridge, PathPrefixKept) {
  httplib::Server srv;
  std::string path;
  srv.Post(R"(/.*)", [&](const httplib::Request& req, httplib::Response& res) {
    path = req.path;
    res.set_content(R"({"detections":[],"model":"m"})", "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  sf::detect_remote("http://127.0.0.1:" + std::to_string(port) + "/v1/", sf::Image(2, 2), 0.1, fast_retries());
  srv.stop();
  t.join();
  EXPECT_EQ(path, "/v1/detect");
}

TEST(Bridge, OutOfRangeScoreIsSchemaError) {
  const std::string payload = R"({"detections":[{"x1":0,"y1":0,"x2":5,"y2":5,"score":1.7,"label":"car"}],"model":"m"})";
  FixtureServer server([&](const httplib::Request&, httplib::Response& res) { res.set_content(payload, "application/json"); });
  try {
    sf::detect_remote(server.url(), sf::Image(4, 4), 0.1, fast_retries());
    FAIL() << "expected a schema violation";
  } catch (const sf::SchemaError& e) {
    EXPECT_EQ(e.raw_payload(), payload);
  }
}

TEST(Bridge, MalformedResponsesRejected) {
  for (const char* bad : {"not json", "[]", R"({"detections":[]})", R"({"detections":{},"model":"m"})",
                          R"({"detections":[{"x1":0,"y1":0,"x2":5,"score":0.5,"label":"car"}],"model":"m"})",
                          R"({"detections":[{"x1":0,"y1":0,"x2":5,"y2":5,"score":0.5,"label":3}],"model":"m"})",
                          R"({"detections":[{"x1":6,"y1":0,"x2":5,"y2":5,"score":0.5,"label":"car"}],"model":"m"})"})
    EXPECT_THROW(sf::parse_bridge_response(bad), sf::SchemaError) << bad;
}

TEST(Bridge, ServerErrorsRetriedThenSucceed) {
  std::atomic<int> calls{0};
  FixtureServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(kFixtureResponse, "application/json");
  });
  EXPECT_EQ(sf::detect_remote(server.url(), sf::Image(4, 4), 0.1, fast_retries()).size(), 2u);
  EXPECT_EQ(calls.load(), 3);
}

TEST(Bridge, ClientErrorNotRetried) {
  std::atomic<int> calls{0};
  FixtureServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  EXPECT_THROW(sf::detect_remote(server.url(), sf::Image(4, 4), 0.1, fast_retries()), sf::NetworkError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(Bridge, PersistentServerErrorGivesUpAfterFourAttempts) {
  std::atomic<int> calls{0};
  FixtureServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  EXPECT_THROW(sf::detect_remote(server.url(), sf::Image(4, 4), 0.1, fast_retries()), sf::NetworkError);
  EXPECT_EQ(calls.load(), 4);
}

TEST(Bridge, UnreachableIsNetworkError) {
  try {
    sf::detect_remote("http://127.0.0.1:1", sf::Image(4, 4), 0.1, fast_retries());
    FAIL() << "expected a network error";
  } catch (const sf::SchemaError&) {
    FAIL() << "transport failure reported as schema error";
  } catch (const sf::NetworkError& e) {
    EXPECT_NE(std::string(e.what()).find("4 attempts"), std::string::npos);
  }
  EXPECT_THROW(sf::detect_remote("127.0.0.1:1", sf::Image(4, 4), 0.1), sf::DomainError);
}

TEST(Bridge, NetworkErrorAbortsAsr) {
  const sf::BridgeDetector det("http://127.0.0.1:1", 0.05, fast_retries());
  EXPECT_THROW(sf::compute_asr(small_box(), small_box().texture, det, sf::EvalGrid{{0}, {10}, {3}}), sf::NetworkError);
}

TEST(Sticker, FullSquareIsOneRectangle) {
  const sf::PatternRaster p{sf::Image(10, 6, 1.0), 0.15};
  const auto s = sf::export_sticker(p, 0.5, 2.5);
  ASSERT_EQ(s.polygons.size(), 1u);
  ASSERT_EQ(s.polygons[0].size(), 4u);
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const auto& v : s.polygons[0]) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  EXPECT_NEAR(xmax - xmin, 25.0, 1e-9);
  EXPECT_NEAR(ymax - ymin, 15.0, 1e-9);
  EXPECT_NEAR(s.area_mm2(), 25.0 * 15.0, 1e-9);
  EXPECT_EQ(s.width_mm, 25.0);
  EXPECT_EQ(s.height_mm, 15.0);
}

TEST(Sticker, DiscAreaWithinThreePercent) {
  const int n = 96;
  const double r = 30.0, mm = 0.5;
  sf::Image alpha(n, n);
  // Anti-aliased disc from 8x8 supersampling.
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      int in = 0;
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          const double px = x + (a + 0.5) / 8 - n / 2.0, py = y + (b + 0.5) / 8 - n / 2.0;
          in += px * px + py * py <= r * r;
        }
      alpha.at(x, y) = in / 64.0;
    }
  const auto s = sf::export_sticker({alpha, 0.15}, 0.5, mm);
  ASSERT_EQ(s.polygons.size(), 1u);
  const double analytic = M_PI * r * r * mm * mm;
  EXPECT_NEAR(s.area_mm2(), analytic, 0.03 * analytic);
}

TEST(Sticker, RingHasHoleWithOppositeOrientation) {
  const int n = 64;
  sf::Image alpha(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double d = std::hypot(x + 0.5 - n / 2.0, y + 0.5 - n / 2.0);
      alpha.at(x, y) = d <= 25 && d >= 12 ? 1.0 : 0.0;
    }
  const auto s = sf::export_sticker({alpha, 0.15}, 0.5, 1.0);
  ASSERT_EQ(s.polygons.size(), 2u);
  EXPECT_LT(sf::signed_area(s.polygons[0]) * sf::signed_area(s.polygons[1]), 0.0);
  EXPECT_NEAR(s.area_mm2(), M_PI * (25.0 * 25 - 12.0 * 12), 0.05 * M_PI * (25.0 * 25 - 12.0 * 12));
}

TEST(Sticker, EmptyRegionAndBadArguments) {
  const sf::PatternRaster p{sf::Image(8, 8, 0.3), 0.15};
  EXPECT_THROW(sf::export_sticker(p, 0.5, 1.0), sf::DomainError);
  EXPECT_THROW(sf::export_sticker(p, 0.0, 1.0), sf::DomainError);
  EXPECT_THROW(sf::export_sticker(p, 0.2, 0.0), sf::DomainError);
}

TEST(Sticker, SvgAndRasterFiles) {
  sf::Image alpha(8, 8);
  for (int y = 2; y < 6; ++y)
    for (int x = 1; x < 5; ++x) alpha.at(x, y) = 1.0;
  const auto s = sf::export_sticker({alpha, 0.15}, 0.5, 3.0);
  const auto svg = sf::sticker_svg(s);
  EXPECT_NE(svg.find("width=\"24mm\""), std::string::npos);
  EXPECT_NE(svg.find("viewBox=\"0 0 24 24\""), std::string::npos);
  EXPECT_NE(svg.find(" Z\""), std::string::npos);
  EXPECT_EQ(s.raster.at(1, 2), 0.0);
  EXPECT_EQ(s.raster.at(0, 0), 1.0);
  sftest::TempDir dir("sticker");
  sf::write_sticker(s, dir.path());
  EXPECT_EQ(sf::read_image(dir / "sticker.png"), s.raster);
  EXPECT_EQ(sf::read_file_bytes(dir / "sticker.svg"), svg);
}
