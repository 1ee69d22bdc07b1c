#include "error.hpp"
#include "fixtures.hpp"
#include "formats.hpp"
#include "graph_ops.hpp"
#include "layout.hpp"
#include "viewer_service.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

using namespace tgforge;
using namespace tgforge::testing;
using nlohmann::json;

namespace {

// A service on an ephemeral port, served from a background thread.
class Running {
public:
  explicit Running(const std::string &fixture, ServiceOptions options = {})
      : graph_(std::make_shared<const TheoryGraph>(load_fixture(fixture))),
        service_(graph_, std::move(options)) {
    service_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_.run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", service_.port());
    client_->set_read_timeout(30, 0);
    for (int i = 0; i < 100 && !client_->Get("/api/graph"); ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ~Running() {
    service_.stop();
    thread_.join();
  }

  httplib::Client &http() { return *client_; }
  const TheoryGraph &graph() const { return *graph_; }
  int port() const { return service_.port(); }

  json post(const std::string &path, const json &body, int expected_status) {
    auto res = client_->Post(path, body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == expected_status);
    return json::parse(res->body);
  }

  json get(const std::string &path, int expected_status = 200) {
    auto res = client_->Get(path);
    REQUIRE(res);
    CHECK(res->status == expected_status);
    return json::parse(res->body);
  }

  json wait_terminal(const std::string &id) {
    for (int i = 0; i < 3000; ++i) {
      json s = get("/api/layout/" + id);
      const std::string state = s["state"];
      if (state == "converged" || state == "stopped" || state == "failed") return s;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    FAIL("layout job did not finish");
    return {};
  }

private:
  std::shared_ptr<const TheoryGraph> graph_;
  ViewerService service_;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

struct Event {
  std::string type;
  json data;
};

// Reads an event stream to completion.
std::vector<Event> subscribe(int port, const std::string &id) {
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60, 0);
  std::string buffer;
  std::vector<Event> events;
  auto res = client.Get("/api/layout/" + id + "/events", [&](const char *data, size_t n) {
    buffer.append(data, n);
    for (auto end = buffer.find("\n\n"); end != std::string::npos; end = buffer.find("\n\n")) {
      const std::string block = buffer.substr(0, end);
      buffer.erase(0, end + 2);
      Event e;
      std::istringstream lines(block);
      for (std::string line; std::getline(lines, line);) {
        if (line.rfind("event: ", 0) == 0) e.type = line.substr(7);
        if (line.rfind("data: ", 0) == 0) e.data = json::parse(line.substr(6));
      }
      events.push_back(std::move(e));
    }
    return true;
  });
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type").rfind("text/event-stream", 0) == 0);
  CHECK(buffer.empty());
  return events;
}

} // namespace

TEST_CASE("GET /api/graph returns the graph document") {
  Running s("chain.json");
  auto res = s.http().Get("/api/graph");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "application/json; charset=utf-8");
  const json doc = json::parse(res->body);
  CHECK(doc["nodes"].size() == 3);
  for (const json &n : doc["nodes"]) CHECK(n.contains("uri"));
  CHECK(res->body == serialize_graph(s.graph()));
}

TEST_CASE("GET / serves a landing page or the web root") {
  {
    Running s("chain.json");
    auto res = s.http().Get("/");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type").rfind("text/html", 0) == 0);
  }
  const auto root = std::filesystem::temp_directory_path() / "tgforge-web-root-test";
  std::filesystem::create_directories(root);
  std::ofstream(root / "index.html") << "<html>viewer</html>";
  {
    Running s("chain.json", ServiceOptions{.web_root = root.string()});
    auto res = s.http().Get("/");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == "<html>viewer</html>");
    CHECK(s.http().Get("/api/graph")->status == 200);
  }
  std::filesystem::remove_all(root);

  auto graph = std::make_shared<const TheoryGraph>(load_fixture("chain.json"));
  CHECK_THROWS_AS(ViewerService(graph, ServiceOptions{.web_root = "/no/such/dir"}), Error);
}

TEST_CASE("layout job on the chain converges and matches a direct run") {
  Running s("chain.json");
  const json started = s.post("/api/layout", {{"seed", 7}}, 202);
  CHECK(started["state"] == "pending");
  const std::string id = started["id"];
  const json done = s.wait_terminal(id);
  CHECK(done["state"] == "converged");
  CHECK(done["converged"] == true);

  LayoutParams p;
  p.seed = 7;
  const Layout direct = run_layout(s.graph(), p);
  CHECK(done["result"] == json::parse(serialize_layout(s.graph(), direct, &p)));
  CHECK(done["iteration"] == direct.iterations_run);

  // Late subscribers get just the terminal event.
  const auto events = subscribe(s.port(), id);
  REQUIRE(events.size() == 1);
  CHECK(events[0].type == "terminal");
  CHECK(events[0].data["state"] == "converged");
  CHECK(events[0].data["iteration"] == direct.iterations_run);
  CHECK(events[0].data["positions"].size() == 3);
}

TEST_CASE("progress stream, single-job policy and stop") {
  Running s("nasa739.json");
  const json started =
      s.post("/api/layout", {{"maxIterations", 100000}, {"convergenceEps", 1e-12}}, 202);
  const std::string id = started["id"];

  std::vector<Event> events;
  std::thread reader([&] { events = subscribe(s.port(), id); });

  // Wait for a few progress snapshots, then try a second job.
  for (int i = 0; i < 2000 && s.get("/api/layout/" + id)["iteration"].get<int>() < 20; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  const json clash = s.post("/api/layout", json::object(), 409);
  CHECK(clash["error"]["code"] == "job_active");

  const json stopped = s.post("/api/layout/" + id + "/stop", json::object(), 200);
  CHECK(stopped["state"] == "stopped");
  CHECK(stopped["converged"] == false);
  CHECK(stopped["result"]["positions"].size() == 739);
  reader.join();

  REQUIRE(events.size() >= 3);
  int last = 0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    CHECK(events[i].type == "progress");
    const int it = events[i].data["iteration"];
    CHECK(it > last);
    CHECK(it % 5 == 0);
    CHECK(events[i].data["positions"].size() == 739);
    last = it;
  }
  const Event &terminal = events.back();
  CHECK(terminal.type == "terminal");
  CHECK(terminal.data["state"] == "stopped");
  CHECK(terminal.data["reason"] == "requested");
  CHECK(terminal.data["iteration"].get<int>() >= last);

  // Positions in transit carry at most six significant digits.
  for (const auto &[node, xyz] : terminal.data["positions"].items())
    for (const json &c : xyz) CHECK(round_significant(c.get<double>(), 6) == c.get<double>());

  // With the job finished a new one may start.
  const json next = s.post("/api/layout", {{"maxIterations", 3}}, 202);
  const json capped = s.wait_terminal(next["id"]);
  CHECK(capped["state"] == "stopped");
  CHECK(capped["iteration"] == 3);
  CHECK(subscribe(s.port(), next["id"]).back().data["reason"] == "max_iterations");
}

TEST_CASE("invalid layout requests") {
  Running s("chain.json");
  const json negative = s.post("/api/layout", {{"maxIterations", -1}}, 400);
  CHECK(negative["error"]["code"] == "invalid_params");
  CHECK(negative["error"]["field"] == "maxIterations");
  CHECK(s.post("/api/layout", {{"theta", -0.5}}, 400)["error"]["field"] == "theta");
  CHECK(s.post("/api/layout", {{"warp", 9}}, 400)["error"]["field"] == "warp");
  auto res = s.http().Post("/api/layout", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  CHECK(s.get("/api/layout/job-99", 404)["error"]["code"] == "unknown_job");
  CHECK(s.post("/api/layout/job-99/stop", json::object(), 404)["error"]["code"] == "unknown_job");
  CHECK(s.http().Get("/api/layout/job-99/events")->status == 404);
}

TEST_CASE("POST /api/filter") {
  Running s("mixed.json");
  const json imports = s.post("/api/filter", {{"enabledKinds", {"import"}}}, 200);
  CHECK(imports["edges"] == json::array({"i1", "i2", "i3"}));
  CHECK(imports["nodes"].size() == 4);

  const json spec = {{"enabledKinds", {"import"}}, {"focus", {{"node", "a"}, {"mode", "reachable"}}}};
  const json focused = s.post("/api/filter", spec, 200);
  CHECK(focused == json::parse(to_json(s.graph(), apply_filter(s.graph(), parse_filter_spec(spec.dump())))));

  const json sink = s.post(
      "/api/filter", {{"enabledKinds", {"import"}}, {"focus", {{"node", "c"}, {"mode", "reachable"}}}}, 200);
  CHECK(sink["nodes"] == json::array({"c"}));
  CHECK(sink["edges"].empty());

  CHECK(s.post("/api/filter", {{"focus", {{"node", "a"}, {"mode", "upward"}}}}, 400)["error"]["code"] ==
        "schema_error");
  CHECK(s.post("/api/filter", {{"enabledKinds", {"nope"}}}, 400)["error"]["code"] == "invalid_input");
  CHECK(s.post("/api/filter", {{"focus", {{"node", "zz"}, {"mode", "reachable"}}}}, 400)["error"]
             ["code"] == "invalid_input");
  // A cutoff needs a layout; once a job has finished, its result is used.
  CHECK(s.post("/api/filter", {{"cutoff", {{"center", {0, 0, 0}}, {"radius", 1e9}}}}, 400)["error"]
             ["code"] == "invalid_input");
  s.wait_terminal(s.post("/api/layout", json::object(), 202)["id"]);
  CHECK(s.post("/api/filter", {{"cutoff", {{"center", {0, 0, 0}}, {"radius", 1e9}}}}, 200)["nodes"]
            .size() == 4);
}

TEST_CASE("GET /api/node/{id}") {
  Running s("chain.json");
  const json b = s.get("/api/node/b");
  CHECK(b["id"] == "b");
  CHECK(b["label"] == "Middle");
  CHECK(b["uri"] == "http://example.org/chain?b");
  CHECK(b["detailsUrl"].is_null());
  CHECK(b["neighbors"] == json::parse(R"([
    {"nodeId":"a","edgeId":"ab","edgeKind":"import","direction":"incoming"},
    {"nodeId":"c","edgeId":"bc","edgeKind":"import","direction":"outgoing"}])"));
  CHECK(s.get("/api/node/a")["detailsUrl"] == "http://example.org/chain/a.html");
  CHECK(s.get("/api/node/ghost", 404)["error"]["code"] == "unknown_node");
}

TEST_CASE("isolated node has no neighbours") {
  Running s("star.json");
  CHECK(s.get("/api/node/far")["neighbors"].size() == 1);
  CHECK(s.get("/api/node/c")["neighbors"].size() == 5);

  auto graph = std::make_shared<const TheoryGraph>(
      parse_graph(R"({"nodes":[{"id":"lonely one","uri":"u"}],"edges":[]})"));
  ViewerService service(graph);
  service.bind("127.0.0.1", 0);
  std::thread t([&] { service.run(); });
  httplib::Client c("127.0.0.1", service.port());
  httplib::Result res;
  for (int i = 0; i < 100 && !(res = c.Get("/api/node/lonely%20one")); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["neighbors"].empty());
  service.stop();
  t.join();
}

TEST_CASE("binding a taken port fails") {
  Running s("chain.json");
  auto graph = std::make_shared<const TheoryGraph>(load_fixture("chain.json"));
  ViewerService other(graph);
  try {
    other.bind("127.0.0.1", s.port());
    FAIL("bound a port that is in use");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}
