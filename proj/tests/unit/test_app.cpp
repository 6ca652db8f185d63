#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "oracles.hpp"
#include "pmnet/app/service.hpp"
#include "pmnet/dataset/builder.hpp"
#include "pmnet/eval/metrics.hpp"
#include "pmnet/geo/map_generator.hpp"
#include "pmnet/model/checkpoint.hpp"

using namespace pmnet;
using namespace pmnet::app;
using nlohmann::json;

namespace {

model::PmnetConfig tiny() {
  auto c = model::PmnetConfig::desk();
  c.input_size = 32;
  c.base_width = 4;
  c.block_counts = {1, 1, 1, 1};
  return c;
}

// Shared fixture: a 32 px dataset and a registry with one tiny checkpoint.
class AppFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new pmnet::testing::TempDir("pmnet_app");
    auto sc = dataset::scenario_preset("urban_a");
    sc.name = "fx";
    sc.map.size = 32;
    sc.map.block_min = 4;
    sc.map.block_max = 8;
    sc.tx_margin = 2;
    sc.n_maps = 3;
    sc.generator = "3gpp";
    dataset::build_dataset(*dir_ / "data", sc, {}, 0.67, 1);
    std::filesystem::create_directories(*dir_ / "reg/sub");
    model::PmnetModel net(tiny());
    model::save_checkpoint(*dir_ / "reg/sub/tiny.ckpt", net, {{"tx_dilation", 0}});
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::filesystem::path data() { return *dir_ / "data"; }
  static std::filesystem::path reg() { return *dir_ / "reg"; }

  static pmnet::testing::TempDir* dir_;
};

pmnet::testing::TempDir* AppFixture::dir_ = nullptr;

geo::Pixel free_pixel(const geo::BuildingMap& m) {
  for (int y = 0; y < m.size(); ++y)
    for (int x = 0; x < m.size(); ++x)
      if (m.at(x, y) == geo::Cell::Free) return {x, y};
  return {-1, -1};
}

geo::Pixel building_pixel(const geo::BuildingMap& m) {
  for (int y = 0; y < m.size(); ++y)
    for (int x = 0; x < m.size(); ++x)
      if (m.at(x, y) == geo::Cell::Building) return {x, y};
  return {-1, -1};
}

}  // namespace

TEST_F(AppFixture, RegistryScan) {
  ModelRegistry r(reg());
  std::vector<std::string> ids;
  for (const auto& e : r.entries()) ids.push_back(e.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"3gpp", "raylaunch", "sub/tiny"}));
  EXPECT_EQ(r.find("sub/tiny")->kind, "pmnet");
  EXPECT_EQ(r.find("sub/tiny")->info.at("config").at("input_size"), 32);
  EXPECT_EQ(r.find("nope"), nullptr);
  EXPECT_THROW(r.model("nope"), RequestError);
  EXPECT_EQ(r.model("sub/tiny"), r.model("sub/tiny"));  // loaded once, shared
  EXPECT_EQ(ModelRegistry::resolve_checkpoint(reg(), "none"), std::nullopt);
  EXPECT_EQ(*ModelRegistry::resolve_checkpoint(reg(), "sub/tiny"), reg() / "sub/tiny.ckpt");
  EXPECT_THROW(ModelRegistry::resolve_checkpoint(reg(), "missing"), std::invalid_argument);
  EXPECT_EQ(ModelRegistry().entries().size(), 2u);
}

TEST_F(AppFixture, MapStoreListing) {
  MapStore maps(data());
  ASSERT_EQ(maps.maps().size(), 3u);
  const auto& m = maps.maps().front();
  EXPECT_EQ(m.size, 32);
  EXPECT_GT(m.meters_per_pixel, 0);
  EXPECT_EQ(maps.load(m.map_id).size(), 32);
  EXPECT_THROW(maps.load("nope"), RequestError);
  const auto th = maps.thumbnail(m.map_id, 16);
  EXPECT_EQ(th.width, 16);
  EXPECT_EQ(maps.propagation().fc_ghz, dataset::scenario_preset("urban_a").propagation.fc_ghz);
}

TEST(ParseRequest, Forms) {
  auto r = parse_predict_request(json{{"map_id", "a"}, {"tx", {3, 4}}, {"model_id", "3gpp"}});
  EXPECT_EQ(*r.map_id, "a");
  EXPECT_EQ(r.tx.x, 3);
  EXPECT_EQ(r.tx.y, 4);
  r = parse_predict_request(json{{"map_id", "a"}, {"tx", {{"x", 5}, {"y", 6}}}, {"model_id", "m"}});
  EXPECT_EQ(r.tx.y, 6);
  EXPECT_THROW(parse_predict_request(json{{"tx", {3, 4}}, {"model_id", "m"}}), RequestError);
  EXPECT_THROW(parse_predict_request(json{{"map_id", "a"}, {"model_id", "m"}}), RequestError);
  EXPECT_THROW(parse_predict_request(json{{"map_id", "a"}, {"tx", "x"}, {"model_id", "m"}}), RequestError);
  EXPECT_THROW(parse_predict_request(json::array()), RequestError);
  const auto png = encode_png(GrayImage(4, 4, 255));
  EXPECT_THROW(parse_predict_request(json{{"map_id", "a"}, {"map_png", base64_encode(png)}, {"tx", {1, 1}},
                                          {"model_id", "m"}}),
               RequestError);
  r = parse_predict_request(json{{"map_png", base64_encode(png)}, {"meters_per_pixel", 2.0}, {"tx", {1, 1}},
                                 {"model_id", "m"}});
  EXPECT_EQ(r.map_image->width, 4);
  EXPECT_EQ(r.meters_per_pixel, 2.0);
}

TEST_F(AppFixture, PredictStatusCodes) {
  ModelRegistry models(reg());
  MapStore maps(data());
  const auto id = maps.maps().front().map_id;
  const auto map = maps.load(id);
  auto status = [&](PredictRequest req) {
    try {
      predict(models, maps, req);
      return 200;
    } catch (const RequestError& e) {
      return e.status();
    }
  };
  PredictRequest ok;
  ok.map_id = id;
  ok.tx = free_pixel(map);
  ok.model_id = "sub/tiny";
  EXPECT_EQ(status(ok), 200);
  auto r = ok;
  r.tx = building_pixel(map);
  EXPECT_EQ(status(r), 400);
  r = ok;
  r.tx = {32, 0};
  EXPECT_EQ(status(r), 400);
  r = ok;
  r.map_id = "nope";
  EXPECT_EQ(status(r), 404);
  r = ok;
  r.model_id = "nope";
  EXPECT_EQ(status(r), 404);
  r = ok;
  r.map_id.reset();
  r.map_image = GrayImage(300, 300, 255);
  r.tx = {5, 5};
  r.model_id = "3gpp";
  EXPECT_EQ(status(r), 400);  // above the inline cap
  r.map_image = GrayImage(64, 64, 255);
  r.model_id = "sub/tiny";
  EXPECT_EQ(status(r), 400);  // model takes 32 px
  r.model_id = "3gpp";
  EXPECT_EQ(status(r), 200);
  r.map_image = GrayImage(64, 32, 255);
  EXPECT_EQ(status(r), 400);
}

TEST_F(AppFixture, PredictIsRepeatableAndConsistent) {
  ModelRegistry models(reg());
  MapStore maps(data());
  const auto id = maps.maps().front().map_id;
  const auto map = maps.load(id);
  PredictRequest req;
  req.map_id = id;
  req.tx = free_pixel(map);
  req.model_id = "sub/tiny";
  const auto a = predict(models, maps, req), b = predict(models, maps, req);
  EXPECT_EQ(a.gray, b.gray);
  EXPECT_EQ(a.gray.width, 32);
  for (std::size_t i = 0; i < a.gray.pixels.size(); ++i) EXPECT_EQ(a.roi.pixels[i] == 255, a.gray.pixels[i] != 0);
  // the same map sent inline gives the same answer
  auto inline_req = req;
  inline_req.map_id.reset();
  inline_req.map_image = geo::map_to_image(map);
  inline_req.meters_per_pixel = map.meters_per_pixel();
  EXPECT_EQ(predict(models, maps, inline_req).gray, a.gray);
  const auto j = to_json(a);
  EXPECT_EQ(decode_png_gray(base64_decode(j.at("gray_png").get<std::string>())), a.gray);
  EXPECT_EQ(j.at("units").at("dbm_offset"), -255);
}

TEST_F(AppFixture, ServiceEndpoints) {
  ServiceConfig cfg;
  cfg.dataset_root = data();
  cfg.registry = reg();
  cfg.threads = 2;
  cfg.load_delay = std::chrono::milliseconds(300);
  Service svc(cfg);
  const int port = svc.bind("127.0.0.1", 0);
  std::thread th([&] { svc.run(); });
  httplib::Client cli("127.0.0.1", port);

  auto health = cli.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 503);
  EXPECT_EQ(json::parse(health->body).at("status"), "loading");
  auto early = cli.Get("/maps");
  ASSERT_TRUE(early);
  EXPECT_EQ(early->status, 503);

  ASSERT_TRUE(svc.wait_loaded()) << svc.load_error();
  health = cli.Get("/healthz");
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");

  const auto models = cli.Get("/models");
  ASSERT_EQ(models->status, 200);
  EXPECT_EQ(json::parse(models->body).size(), 3u);

  const auto maps_res = cli.Get("/maps");
  ASSERT_EQ(maps_res->status, 200);
  const auto listing = json::parse(maps_res->body);
  ASSERT_EQ(listing.size(), 3u);
  const std::string id = listing[0].at("map_id");
  const auto png = cli.Get("/maps/" + id + ".png");
  ASSERT_EQ(png->status, 200);
  EXPECT_EQ(cli.Get("/maps/nope.png")->status, 404);

  MapStore store(data());
  const auto tx = free_pixel(store.load(id));
  const json body{{"map_id", id}, {"tx", {tx.x, tx.y}}, {"model_id", "sub/tiny"}};
  const auto res = cli.Post("/predict", body.dump(), "application/json");
  ASSERT_EQ(res->status, 200) << res->body;
  const auto out = json::parse(res->body);

  ModelRegistry reg_local(reg());
  PredictRequest req;
  req.map_id = id;
  req.tx = tx;
  req.model_id = "sub/tiny";
  const auto direct = encode_png(predict(reg_local, store, req).gray);
  EXPECT_EQ(base64_decode(out.at("gray_png").get<std::string>()), direct);

  const auto raw = cli.Post("/predict?format=png", body.dump(), "application/json");
  ASSERT_EQ(raw->status, 200);
  EXPECT_EQ(std::vector<std::uint8_t>(raw->body.begin(), raw->body.end()), direct);
  EXPECT_FALSE(raw->get_header_value("X-Latency-Ms").empty());

  const auto map_png = std::string(png->body);
  const auto upload = cli.Post("/predict?tx=" + std::to_string(tx.x) + "," + std::to_string(tx.y) +
                                   "&model_id=sub/tiny&meters_per_pixel=" +
                                   std::to_string(store.find(id)->meters_per_pixel),
                               map_png, "image/png");
  ASSERT_EQ(upload->status, 200) << upload->body;
  EXPECT_EQ(base64_decode(json::parse(upload->body).at("gray_png").get<std::string>()), direct);

  EXPECT_EQ(cli.Post("/predict", "{not json", "application/json")->status, 400);
  EXPECT_EQ(cli.Post("/predict", json{{"map_id", "nope"}, {"tx", {1, 1}}, {"model_id", "3gpp"}}.dump(),
                     "application/json")->status, 404);

  svc.stop();
  th.join();
}

TEST(ServiceConfig, EnvironmentFallbacks) {
  ::setenv("PMNET_REGISTRY", "/tmp/reg_env", 1);
  ::unsetenv("PMNET_DATASET_ROOT");
  auto cfg = with_env_defaults({});
  EXPECT_EQ(*cfg.registry, "/tmp/reg_env");
  EXPECT_FALSE(cfg.dataset_root);
  ServiceConfig explicit_cfg;
  explicit_cfg.registry = "/x";
  EXPECT_EQ(*with_env_defaults(explicit_cfg).registry, "/x");
  ::unsetenv("PMNET_REGISTRY");
}

TEST(Latency, DeskModelMedianUnderBudget) {
  pmnet::testing::TempDir dir("pmnet_lat");
  model::PmnetModel net(model::PmnetConfig::desk());
  model::save_checkpoint(dir / "desk.ckpt", net, {{"tx_dilation", 0}});
  ModelRegistry models(dir.path());
  MapStore maps;
  geo::MapGenParams p;
  p.size = net.config().input_size;
  p.seed = 3;
  const auto map = geo::generate_map(p);
  PredictRequest req;
  req.map_image = geo::map_to_image(map);
  req.meters_per_pixel = map.meters_per_pixel();
  req.tx = free_pixel(map);
  req.model_id = "desk";
  predict(models, maps, req);  // loads the model
  std::vector<double> ms;
  for (int i = 0; i < 15; ++i) ms.push_back(predict(models, maps, req).latency_ms);
  const auto st = eval::latency_stats(ms);
  RecordProperty("p50_ms", std::to_string(st.p50_ms));
  EXPECT_LT(st.p50_ms, 200.0);
}
