#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "topv/avpg.hpp"
#include "topv/worldsim.hpp"

namespace topv {

enum class QueryRole { SelectRegion, PredictTarget, ScoreMarkers };

std::string_view to_string(QueryRole role);

struct ReasonerQuery {
  QueryRole role = QueryRole::PredictTarget;
  const PromptMap* map = nullptr;
  std::string target_category;
  std::uint64_t episode_seed = 0;
};

// All coordinates are in the prompt map's labelled meter frame.
struct RegionAnswer {
  std::optional<Vec2> center;  // nullopt = decline
};
struct TargetAnswer {
  Vec2 position;
};
struct ScoresAnswer {
  std::vector<double> scores;  // aligned with the query map's markers
};

struct ReasonerAnswer {
  std::variant<RegionAnswer, TargetAnswer, ScoresAnswer> value;
  bool fallback = false;
  std::string transcript;
};

// Stand-in for the multimodal model. Implementations are total: every
// well-formed query gets a role-matched answer.
class Reasoner {
 public:
  virtual ~Reasoner() = default;
  virtual ReasonerAnswer query(const ReasonerQuery& q) const = 0;
  virtual std::string name() const = 0;
};

// Maps a category to its usual room; empty for unknown categories.
std::string_view room_of(std::string_view category);

// Commonsense co-occurrence in [0, 1]: 1 for the same category, high for
// categories that share a room, low otherwise, 0.5 when unknown.
double co_occurrence(std::string_view target, std::string_view other);

// Deterministic offline oracle. Declines zooming unless some text boxes
// overlap, predicts the target at the midpoint of the largest frontier, and
// scores markers by object co-occurrence with the target.
class HeuristicReasoner final : public Reasoner {
 public:
  ReasonerAnswer query(const ReasonerQuery& q) const override;
  std::string name() const override { return "heuristic"; }
};

// Test-only oracle that reads scene ground truth.
class ScriptedReasoner final : public Reasoner {
 public:
  explicit ScriptedReasoner(const Scene& scene, double score_length = 5.0);
  ReasonerAnswer query(const ReasonerQuery& q) const override;
  std::string name() const override { return "scripted"; }

 private:
  using Field = std::vector<std::int64_t>;
  const Field& field_for_object(std::size_t index) const;
  const Field& field_for_category(const std::string& category) const;
  std::optional<double> geodesic(const Field& f, Vec2 world) const;

  const Scene& scene_;
  double score_length_;
  mutable std::mutex mu_;
  mutable std::map<std::size_t, Field> object_fields_;
  mutable std::map<std::string, Field> category_fields_;
};

// Uniformly random but valid answers, seeded from the query content so the
// answers are reproducible and thread-safe.
class RandomReasoner final : public Reasoner {
 public:
  ReasonerAnswer query(const ReasonerQuery& q) const override;
  std::string name() const override { return "random"; }
};

struct RemoteConfig {
  std::string endpoint;  // http://host:port/path
  std::chrono::milliseconds deadline{30000};
  int retries = 2;
};

// Posts the prompt map and a role-specific text prompt to an HTTP endpoint.
// After `retries` failed retries, or an unparseable reply, answers with the
// heuristic oracle and marks the answer as a fallback.
class RemoteReasoner final : public Reasoner {
 public:
  explicit RemoteReasoner(RemoteConfig cfg);
  ReasonerAnswer query(const ReasonerQuery& q) const override;
  std::string name() const override { return "remote"; }

  // Request document for a query (exposed for tests and debug dumps).
  std::string request_body(const ReasonerQuery& q) const;

 private:
  RemoteConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;
  HeuristicReasoner fallback_;
};

// First "(a, b)" decimal pair in free-form text.
std::optional<Vec2> parse_coordinates(std::string_view text);

// "m<k>: <v>" pairs; markers not mentioned default to 0.5, values are clamped
// to [0, 1]. nullopt when the text has no pair at all.
std::optional<std::vector<double>> parse_scores(std::string_view text, const std::vector<int>& marker_ids);

// Role-specific text prompt with the target category, marker table and
// coordinate frame substituted into the bundled template.
std::string render_prompt(const ReasonerQuery& q);

std::string base64_encode(std::string_view bytes);

enum class ReasonerKind { Heuristic, Scripted, Random, Remote };

std::optional<ReasonerKind> parse_reasoner_kind(std::string_view s);

}  // namespace topv
