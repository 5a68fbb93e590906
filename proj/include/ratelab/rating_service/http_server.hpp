#pragma once

#include <memory>
#include <string>
#include <thread>

#include "ratelab/rating_service/rating_service.hpp"

namespace httplib {
class Server;
}

namespace ratelab::rating {

/// Serves a RatingService over HTTP/1.1 with JSON bodies:
///   GET  /segments/next  200 PendingSegment, or 204 with
///                        X-Rating-Status: none_pending
///   POST /ratings        {segment_id, rating, rater_id, timestamp?}
///                        200 {"status":"accepted"} or 4xx {"error": ...}
///   GET  /status         {pending, rated, required, phase}
class RatingHttpServer {
 public:
  explicit RatingHttpServer(RatingService& service);
  ~RatingHttpServer();

  RatingHttpServer(const RatingHttpServer&) = delete;
  RatingHttpServer& operator=(const RatingHttpServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Throws std::runtime_error if the address cannot be bound.
  void start(const std::string& host, int port);
  void stop();
  int port() const noexcept { return port_; }
  bool running() const;

 private:
  RatingService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace ratelab::rating
