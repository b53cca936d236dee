#include <cstdio>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "topv/reasoner.hpp"
#include "topv_prompt_templates.hpp"

namespace topv {

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto n = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                   static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (const auto rest = bytes.size() - i; rest > 0) {
    unsigned n = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string frame_description(const PromptMap& map) {
  const Rect& c = map.transform.crop;
  const Vec2 lo = map.to_frame({c.x, c.y});
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "x grows to the right and y grows upward, in meters; grid lines are labelled with their "
                "coordinate. The image shows x from %.1f to %.1f and y from %.1f to %.1f.",
                lo.x, lo.x + c.w, lo.y, lo.y + c.h);
  return buf;
}

std::string marker_lines(const PromptMap& map) {
  std::ostringstream os;
  for (const auto& m : map.markers) {
    const Vec2 p = map.to_frame(m.centroid);
    char buf[96];
    std::snprintf(buf, sizeof buf, "m%d at (%.1f, %.1f)", m.id, p.x, p.y);
    os << buf;
    if (!m.object_labels.empty()) {
      os << ", near:";
      for (const auto& l : m.object_labels) os << ' ' << l;
    }
    if (m.frontier_members > 0) os << ", unexplored edge";
    os << '\n';
  }
  if (map.markers.empty()) os << "(none)\n";
  return os.str();
}

}  // namespace

std::string render_prompt(const ReasonerQuery& q) {
  std::string t;
  switch (q.role) {
    case QueryRole::SelectRegion: t = prompts::kSelectRegion; break;
    case QueryRole::PredictTarget: t = prompts::kPredictTarget; break;
    case QueryRole::ScoreMarkers: t = prompts::kScoreMarkers; break;
  }
  replace_all(t, "{target}", q.target_category);
  replace_all(t, "{frame}", frame_description(*q.map));
  replace_all(t, "{markers}", marker_lines(*q.map));
  return t;
}

RemoteReasoner::RemoteReasoner(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint, m, kUrl)) {
    throw std::invalid_argument("remote reasoner: endpoint must look like http://host:port/path");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

std::string RemoteReasoner::request_body(const ReasonerQuery& q) const {
  nlohmann::json j;
  j["role"] = to_string(q.role);
  j["target"] = q.target_category;
  j["text_prompt"] = render_prompt(q);
  j["image"] = base64_encode(encode_png(q.map->image));
  j["metadata"] = nlohmann::json::parse(prompt_sidecar(*q.map));
  return j.dump();
}

ReasonerAnswer RemoteReasoner::query(const ReasonerQuery& q) const {
  const std::string body = request_body(q);
  std::optional<std::string> text;
  std::string log;

  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.deadline);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.deadline - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  for (int attempt = 0; attempt <= cfg_.retries && !text; ++attempt) {
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      log += "attempt " + std::to_string(attempt + 1) + ": transport error " + httplib::to_string(res.error()) + "\n";
      continue;
    }
    if (res->status != 200) {
      log += "attempt " + std::to_string(attempt + 1) + ": HTTP " + std::to_string(res->status) + "\n";
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      text = j.at("text").get<std::string>();
    } catch (const std::exception& e) {
      log += "attempt " + std::to_string(attempt + 1) + ": malformed reply: " + e.what() + "\n";
    }
  }

  auto fallback = [&](std::string why) {
    ReasonerAnswer a = fallback_.query(q);
    a.fallback = true;
    a.transcript = log + why + "\nfallback: " + a.transcript;
    return a;
  };
  if (!text) return fallback("no reply");

  ReasonerAnswer a;
  a.transcript = log + *text;
  switch (q.role) {
    case QueryRole::SelectRegion:
      a.value = RegionAnswer{parse_coordinates(*text)};
      return a;
    case QueryRole::PredictTarget: {
      auto p = parse_coordinates(*text);
      if (!p) return fallback(*text + "\nno coordinates in reply");
      a.value = TargetAnswer{*p};
      return a;
    }
    case QueryRole::ScoreMarkers: {
      std::vector<int> ids;
      for (const auto& m : q.map->markers) ids.push_back(m.id);
      if (ids.empty()) {
        a.value = ScoresAnswer{};
        return a;
      }
      auto s = parse_scores(*text, ids);
      if (!s) return fallback(*text + "\nno scores in reply");
      a.value = ScoresAnswer{std::move(*s)};
      return a;
    }
  }
  return fallback("unknown role");
}

}  // namespace topv
