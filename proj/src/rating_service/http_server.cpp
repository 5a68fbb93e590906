#include "ratelab/rating_service/http_server.hpp"

#include <stdexcept>

#include "httplib.h"

namespace ratelab::rating {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace

RatingHttpServer::RatingHttpServer(RatingService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  // httplib's default adds SO_REUSEPORT, which would let a second service
  // share the port and receive some of the ratings.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  // The rating page may be served from another origin.
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Expose-Headers", "X-Rating-Status"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  srv.Get("/segments/next", [this](const httplib::Request&, httplib::Response& res) {
    if (auto next = service_.next_segment()) {
      send_json(res, 200, to_json(*next));
    } else {
      res.status = 204;
      res.set_header("X-Rating-Status", "none_pending");
    }
  });

  srv.Post("/ratings", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      send_error(res, 400, "body is not valid JSON");
      return;
    }
    if (!body.is_object() || !body.contains("segment_id") || !body.contains("rating") ||
        !body["segment_id"].is_number_unsigned() || !body["rating"].is_number_integer()) {
      send_error(res, 400, "expected integer segment_id and rating");
      return;
    }
    std::string rater_id;
    if (body.contains("rater_id")) {
      if (!body["rater_id"].is_string()) {
        send_error(res, 400, "rater_id must be a string");
        return;
      }
      rater_id = body["rater_id"].get<std::string>();
    }
    const auto rating = body["rating"].get<std::int64_t>();
    const int clamped = rating < -1 ? -1 : rating > 1000 ? 1000 : static_cast<int>(rating);
    const auto result =
        service_.submit(body["segment_id"].get<std::uint64_t>(), clamped, rater_id);
    if (result.accepted()) {
      send_json(res, 200, {{"status", "accepted"}});
    } else {
      send_error(res, result.http_status(), result.message);
    }
  });

  srv.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, to_json(service_.status()));
  });
}

RatingHttpServer::~RatingHttpServer() { stop(); }

void RatingHttpServer::start(const std::string& host, int port) {
  if (thread_.joinable()) throw std::logic_error("rating server already started");
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ <= 0) throw std::runtime_error("cannot bind " + host);
  } else {
    if (!server_->bind_to_port(host, port)) {
      throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    port_ = port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void RatingHttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

bool RatingHttpServer::running() const { return server_ && server_->is_running(); }

}  // namespace ratelab::rating
