#include "pmnet/app/service.hpp"

#include <cstdlib>
#include <mutex>

#include <httplib.h>

#include "pmnet/geo/map_generator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pmnet::app {

ServiceConfig with_env_defaults(ServiceConfig cfg) {
  if (!cfg.dataset_root)
    if (const char* v = std::getenv("PMNET_DATASET_ROOT"); v && *v) cfg.dataset_root = fs::path(v);
  if (!cfg.registry)
    if (const char* v = std::getenv("PMNET_REGISTRY"); v && *v) cfg.registry = fs::path(v);
  return cfg;
}

struct Service::Impl {
  httplib::Server http;
  std::unique_ptr<ModelRegistry> models;
  std::unique_ptr<MapStore> maps = std::make_unique<MapStore>();
  mutable std::mutex mu;
  std::string error;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}, {"status", status}});
}

geo::Pixel parse_tx_param(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw RequestError(400, "tx must be given as x,y");
  try {
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw RequestError(400, "tx must be given as x,y");
  }
}

PredictRequest request_from_png(const httplib::Request& req) {
  PredictRequest r;
  if (!req.has_param("tx") || !req.has_param("model_id"))
    throw RequestError(400, "raw PNG requests need tx and model_id query parameters");
  r.tx = parse_tx_param(req.get_param_value("tx"));
  r.model_id = req.get_param_value("model_id");
  if (req.has_param("meters_per_pixel")) {
    try {
      r.meters_per_pixel = std::stod(req.get_param_value("meters_per_pixel"));
    } catch (const std::exception&) {
      throw RequestError(400, "meters_per_pixel must be a number");
    }
  }
  try {
    const auto* p = reinterpret_cast<const std::uint8_t*>(req.body.data());
    r.map_image = decode_png_gray({p, req.body.size()});
  } catch (const std::exception& e) {
    throw RequestError(400, std::string("body is not a readable PNG: ") + e.what());
  }
  return r;
}

}  // namespace

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  http.set_payload_max_length(8u << 20);
  http.new_task_queue = [n = std::max(1, cfg_.threads)] { return new httplib::ThreadPool(n); };
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

  auto guard = [this](httplib::Response& res) {
    if (state_ == State::Ready) return true;
    send_error(res, 503, state_ == State::Loading ? "service is loading" : "service failed to load: " + load_error());
    return false;
  };

  http.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    const State s = state_;
    json body{{"status", s == State::Ready ? "ok" : s == State::Loading ? "loading" : "error"}};
    if (s == State::Failed) body["error"] = load_error();
    if (s == State::Ready) {
      body["models"] = impl_->models->entries().size();
      body["maps"] = impl_->maps->maps().size();
    }
    send_json(res, s == State::Ready ? 200 : 503, body);
  });

  http.Get("/models", [this, guard](const httplib::Request&, httplib::Response& res) {
    if (!guard(res)) return;
    json out = json::array();
    for (const auto& e : impl_->models->entries()) out.push_back({{"model_id", e.id}, {"kind", e.kind}, {"info", e.info}});
    send_json(res, 200, out);
  });

  http.Get("/maps", [this, guard](const httplib::Request&, httplib::Response& res) {
    if (!guard(res)) return;
    json out = json::array();
    for (const auto& m : impl_->maps->maps())
      out.push_back({{"map_id", m.map_id},
                     {"size", m.size},
                     {"meters_per_pixel", m.meters_per_pixel},
                     {"scenes", m.scene_ids},
                     {"default_tx", {m.default_tx.x, m.default_tx.y}},
                     {"thumbnail_png", base64_encode(encode_png(impl_->maps->thumbnail(m.map_id)))}});
    send_json(res, 200, out);
  });

  http.Get(R"(/maps/([^/]+)\.png)", [this, guard](const httplib::Request& req, httplib::Response& res) {
    if (!guard(res)) return;
    try {
      const auto png = encode_png(geo::map_to_image(impl_->maps->load(req.matches[1])));
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    } catch (const RequestError& e) {
      send_error(res, e.status(), e.what());
    }
  });

  http.Post("/predict", [this, guard](const httplib::Request& req, httplib::Response& res) {
    if (!guard(res)) return;
    try {
      const bool raw_in = req.get_header_value("Content-Type").starts_with("image/png");
      const auto request = raw_in ? request_from_png(req) : [&] {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::exception& e) {
          throw RequestError(400, std::string("body is not JSON: ") + e.what());
        }
        return parse_predict_request(body);
      }();
      const auto result = predict(*impl_->models, *impl_->maps, request);
      const bool raw_out = req.get_param_value("format") == "png" ||
                           req.get_header_value("Accept").find("image/png") != std::string::npos;
      if (raw_out) {
        const auto png = encode_png(result.gray);
        res.set_header("X-Latency-Ms", std::to_string(result.latency_ms));
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      } else {
        send_json(res, 200, to_json(result));
      }
    } catch (const RequestError& e) {
      send_error(res, e.status(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  loader_ = std::thread([this] {
    try {
      if (cfg_.load_delay.count() > 0) std::this_thread::sleep_for(cfg_.load_delay);
      impl_->models = std::make_unique<ModelRegistry>(cfg_.registry);
      if (cfg_.dataset_root) impl_->maps = std::make_unique<MapStore>(*cfg_.dataset_root);
      impl_->models->load_all();
      state_ = State::Ready;
    } catch (const std::exception& e) {
      std::lock_guard lock(impl_->mu);
      impl_->error = e.what();
      state_ = State::Failed;
    }
  });
}

Service::~Service() {
  stop();
  if (loader_.joinable()) loader_.join();
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  if (!impl_->http.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::run() { impl_->http.listen_after_bind(); }

void Service::stop() { impl_->http.stop(); }

bool Service::wait_loaded() {
  if (loader_.joinable()) loader_.join();
  return state_ == State::Ready;
}

std::string Service::load_error() const {
  std::lock_guard lock(impl_->mu);
  return impl_->error;
}

}  // namespace pmnet::app
