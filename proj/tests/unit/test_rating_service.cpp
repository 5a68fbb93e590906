#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "ratelab/rating_service/http_server.hpp"
#include "ratelab/rating_service/rating_service.hpp"
#include "ratelab/segments/dataset_io.hpp"
#include "test_support.hpp"

// after Eigen: the resolver headers it pulls in define a macro named res
#include "httplib.h"

using namespace ratelab;
using namespace ratelab::rating;
using nlohmann::json;

namespace {

segments::Segment make_segment(std::uint64_t id, int length = 4) {
  segments::Segment s;
  s.segment_id = id;
  s.env_name = "point-mass";
  s.states = Eigen::MatrixXd::Constant(length, 4, 0.1 * static_cast<double>(id));
  s.actions = Eigen::MatrixXd::Zero(length, 2);
  s.step_rewards.assign(static_cast<std::size_t>(length), 0.25);
  s.ground_truth_return = 0.25 * length;
  return s;
}

struct FakeClock {
  double now = 1000.0;
  Clock fn() {
    return [this] { return now; };
  }
};

RatingServiceOptions options_with(FakeClock& clock, std::size_t required = 10) {
  RatingServiceOptions o;
  o.n_classes = 4;
  o.required = required;
  o.lease_seconds = 60.0;
  o.clock = clock.fn();
  return o;
}

std::size_t count_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

}  // namespace

TEST_CASE("segments are leased oldest first and re-issued after the lease expires") {
  FakeClock clock;
  RatingService svc(options_with(clock));
  CHECK(svc.add_pending(make_segment(5)));
  CHECK(svc.add_pending(make_segment(2)));
  CHECK_FALSE(svc.add_pending(make_segment(2)));

  auto first = svc.next_segment();
  REQUIRE(first);
  CHECK(first->segment_id == 2);
  CHECK(first->issued_at == 1000.0);
  CHECK(first->length == 4);
  CHECK(first->n_classes == 4);
  auto second = svc.next_segment();
  REQUIRE(second);
  CHECK(second->segment_id == 5);
  CHECK_FALSE(svc.next_segment());

  clock.now += 59.0;
  CHECK_FALSE(svc.next_segment());
  clock.now += 1.0;
  auto again = svc.next_segment();
  REQUIRE(again);
  CHECK(again->segment_id == 2);
}

TEST_CASE("submission outcomes") {
  FakeClock clock;
  RatingService svc(options_with(clock, 2));
  for (std::uint64_t id = 0; id < 4; ++id) svc.add_pending(make_segment(id));

  CHECK(svc.submit(0, 4, "r").outcome == SubmitOutcome::out_of_range);
  CHECK(svc.submit(0, -1, "r").http_status() == 400);
  CHECK(svc.submit(77, 1, "r").outcome == SubmitOutcome::unknown_segment);
  CHECK(svc.submit(77, 1, "r").http_status() == 404);
  CHECK(svc.submit(0, 3, "r").accepted());
  CHECK(svc.submit(0, 3, "r").outcome == SubmitOutcome::duplicate);
  CHECK(svc.submit(0, 3, "r").http_status() == 409);
  // a rating for a segment nobody leased is still accepted
  CHECK(svc.submit(3, 0, "r").accepted());
  CHECK(svc.status().phase == Phase::training);
  CHECK(svc.submit(1, 0, "r").outcome == SubmitOutcome::budget_reached);
  CHECK(svc.submit(1, 0, "r").http_status() == 409);
  CHECK(SubmitResult{SubmitOutcome::storage_failed, ""}.http_status() == 500);

  const auto ds = svc.dataset();
  REQUIRE(ds.size() == 2);
  CHECK(ds.examples()[0].rater == segments::RaterKind::human);
  CHECK(ds.examples()[0].rater_id == "r");
  CHECK(ds.class_counts() == std::vector<std::size_t>{1, 0, 0, 1});
}

TEST_CASE("status tracks pending and rated counts") {
  FakeClock clock;
  RatingService svc(options_with(clock, 3));
  for (std::uint64_t id = 0; id < 5; ++id) svc.add_pending(make_segment(id));
  svc.submit(1, 2, "");
  const auto s = svc.status();
  CHECK(s.pending == 4);
  CHECK(s.rated == 1);
  CHECK(s.required == 3);
  CHECK(s.phase == Phase::collecting);
  const auto doc = to_json(s);
  CHECK(doc == json{{"pending", 4}, {"rated", 1}, {"required", 3}, {"phase", "collecting"}});
  svc.set_phase(Phase::policy_learning);
  CHECK(to_json(svc.status())["phase"] == "policy_learning");
}

TEST_CASE("accepted ratings are on disk before the ack and survive a restart") {
  FakeClock clock;
  const auto path = test::temp_path("ratings.jsonl");
  {
    auto opts = options_with(clock, 3);
    opts.jsonl_path = path;
    RatingService svc(opts);
    for (std::uint64_t id = 0; id < 5; ++id) svc.add_pending(make_segment(id));
    for (std::uint64_t id = 0; id < 2; ++id) {
      REQUIRE(svc.submit(id, static_cast<int>(id), "alice").accepted());
      CHECK(count_lines(path) == id + 1);
    }
  }
  auto opts = options_with(clock, 3);
  opts.jsonl_path = path;
  RatingService resumed(opts);
  CHECK(resumed.rated() == 2);
  CHECK_FALSE(resumed.add_pending(make_segment(1)));
  CHECK(resumed.add_pending(make_segment(2)));
  CHECK(resumed.submit(2, 3, "bob").accepted());
  CHECK(resumed.status().phase == Phase::training);
  const auto back = segments::load_jsonl(path, 4);
  CHECK(back.size() == 3);
  CHECK(back.examples()[2].rater_id == "bob");
  std::filesystem::remove(path);
}

TEST_CASE("concurrent raters are serialized") {
  const auto path = test::temp_path("concurrent.jsonl");
  RatingServiceOptions opts;
  opts.required = 400;
  opts.jsonl_path = path;
  RatingService svc(opts);
  for (std::uint64_t id = 0; id < 400; ++id) svc.add_pending(make_segment(id, 2));
  std::vector<std::thread> raters;
  std::atomic<int> accepted{0};
  for (int r = 0; r < 8; ++r) {
    raters.emplace_back([&, r] {
      for (std::uint64_t id = static_cast<std::uint64_t>(r); id < 400; id += 8) {
        accepted += svc.submit(id, static_cast<int>(id % 4), "r" + std::to_string(r)).accepted();
      }
    });
  }
  for (auto& t : raters) t.join();
  CHECK(accepted == 400);
  CHECK(count_lines(path) == 400);
  CHECK(segments::load_jsonl(path, 4).class_counts() == std::vector<std::size_t>{100, 100, 100, 100});
  std::filesystem::remove(path);
}

TEST_CASE("waiting for ratings wakes on submission") {
  RatingServiceOptions opts;
  opts.required = 5;
  RatingService svc(opts);
  svc.add_pending(make_segment(1));
  CHECK_FALSE(svc.wait_for_ratings(1, std::chrono::milliseconds(20)));
  std::thread rater([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    svc.submit(1, 0, "");
  });
  CHECK(svc.wait_for_ratings(1, std::chrono::seconds(10)));
  rater.join();
}

TEST_CASE("HTTP endpoints follow the rating protocol") {
  RatingServiceOptions opts;
  opts.required = 2;
  opts.n_classes = 3;
  RatingService svc(opts);
  RatingHttpServer server(svc);
  server.start("127.0.0.1", 0);
  REQUIRE(server.port() > 0);
  CHECK(server.running());
  httplib::Client client("127.0.0.1", server.port());

  auto res = client.Get("/segments/next");
  REQUIRE(res);
  CHECK(res->status == 204);
  CHECK(res->get_header_value("X-Rating-Status") == "none_pending");

  svc.add_pending(make_segment(7, 3));
  res = client.Get("/segments/next");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const auto doc = json::parse(res->body);
  CHECK(doc["segment_id"] == 7);
  CHECK(doc["env"] == "point-mass");
  CHECK(doc["length"] == 3);
  CHECK(doc["n_classes"] == 3);
  CHECK(doc["states"].size() == 3);
  CHECK(doc["states"][0].size() == 4);
  CHECK(doc["issued_at"].is_number());

  auto post = [&](const std::string& body) {
    auto r = client.Post("/ratings", body, "application/json");
    REQUIRE(r);
    return std::make_pair(r->status, r->body);
  };
  CHECK(post("not json").first == 400);
  CHECK(post(R"({"segment_id": 7})").first == 400);
  CHECK(post(R"({"segment_id": -7, "rating": 1})").first == 400);
  CHECK(post(R"({"segment_id": 7, "rating": 1, "rater_id": 5})").first == 400);
  CHECK(post(R"({"segment_id": 7, "rating": 3})").first == 400);
  CHECK(post(R"({"segment_id": 7, "rating": 99999999999})").first == 400);
  const auto unknown = post(R"({"segment_id": 8, "rating": 1})");
  CHECK(unknown.first == 404);
  CHECK(json::parse(unknown.second).contains("error"));

  const auto ok = post(R"({"segment_id": 7, "rating": 2, "rater_id": "alice", "timestamp": 1.5})");
  CHECK(ok.first == 200);
  CHECK(json::parse(ok.second) == json{{"status", "accepted"}});
  CHECK(post(R"({"segment_id": 7, "rating": 2})").first == 409);

  svc.add_pending(make_segment(8));
  svc.add_pending(make_segment(9));
  CHECK(post(R"({"segment_id": 8, "rating": 0})").first == 200);
  CHECK(post(R"({"segment_id": 9, "rating": 0})").first == 409);

  res = client.Get("/status");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) ==
        json{{"pending", 1}, {"rated", 2}, {"required", 2}, {"phase", "training"}});
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");

  CHECK(svc.dataset().examples()[0].rater_id == "alice");
  server.stop();
  CHECK_FALSE(server.running());
}

TEST_CASE("binding a busy port fails loudly") {
  RatingServiceOptions opts;
  RatingService svc(opts);
  RatingHttpServer a(svc);
  a.start("127.0.0.1", 0);
  RatingHttpServer b(svc);
  CHECK_THROWS_AS(b.start("127.0.0.1", a.port()), std::runtime_error);
}
