#pragma once

// Canned reasoner endpoint for tests and local runs. Answers each role with
// a fixed, well-formed reply derived from the request metadata.

#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace topv::mock {

enum class Mode {
  Ok,       // well-formed replies
  Fail,     // HTTP 500 on every request
  Garbage,  // 200 with text that parses as nothing
};

inline std::string reply_for(const nlohmann::json& req) {
  const std::string role = req.value("role", "");
  const auto& meta = req.contains("metadata") ? req["metadata"] : nlohmann::json::object();
  auto pair = [](const nlohmann::json& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.2f, %.2f)", p.at(0).get<double>(), p.at(1).get<double>());
    return std::string(buf);
  };
  if (role == "select_region") {
    if (meta.contains("textboxes") && !meta["textboxes"].empty()) {
      return "Look closer at " + pair(meta["textboxes"][0]["position"]);
    }
    return "none";
  }
  if (role == "predict_target") {
    if (meta.contains("frontiers") && !meta["frontiers"].empty()) {
      return "Probably near " + pair(meta["frontiers"][0]["midpoint"]);
    }
    return "Probably near " + pair(meta.at("agent").at("position"));
  }
  if (role == "score_markers") {
    std::string out;
    bool first = true;
    for (const auto& m : meta.value("markers", nlohmann::json::array())) {
      out += "m" + std::to_string(m.at("id").get<int>()) + (first ? ": 0.8\n" : ": 0.3\n");
      first = false;
    }
    return out.empty() ? "no areas" : out;
  }
  throw std::invalid_argument("unknown role " + role);
}

class Server {
 public:
  explicit Server(Mode mode = Mode::Ok) : mode_(mode) {
    server_.Post("/.*", [this](const httplib::Request& req, httplib::Response& res) {
      std::string role;
      try {
        const auto j = nlohmann::json::parse(req.body);
        role = j.value("role", "");
        {
          std::lock_guard lock(mu_);
          ++counts_[role];
        }
        switch (mode_.load()) {
          case Mode::Fail:
            res.status = 500;
            res.set_content("mock failure", "text/plain");
            return;
          case Mode::Garbage:
            res.set_content(nlohmann::json{{"text", "I cannot tell."}}.dump(), "application/json");
            return;
          case Mode::Ok:
            res.set_content(nlohmann::json{{"text", reply_for(j)}}.dump(), "application/json");
            return;
        }
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
      }
    });
  }

  ~Server() { stop(); }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw std::runtime_error("mock server: cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  // Serves on the calling thread until stopped.
  void run(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw std::runtime_error("mock server: cannot listen");
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  void set_mode(Mode m) { mode_ = m; }
  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/reason"; }

  std::map<std::string, int> counts() const {
    std::lock_guard lock(mu_);
    return counts_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  std::atomic<Mode> mode_;
  int port_ = -1;
  mutable std::mutex mu_;
  std::map<std::string, int> counts_;
};

}  // namespace topv::mock
