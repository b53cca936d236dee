#include <algorithm>
#include <regex>
#include <string>

#include "topv/reasoner.hpp"

namespace topv {

std::optional<Vec2> parse_coordinates(std::string_view text) {
  static const std::regex kPair(R"(\(\s*([-+]?\d+(?:\.\d*)?|[-+]?\.\d+)\s*,\s*([-+]?\d+(?:\.\d*)?|[-+]?\.\d+)\s*\))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin(), text.end(), m, kPair)) return std::nullopt;
  try {
    return Vec2{std::stod(m[1].str()), std::stod(m[2].str())};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<std::vector<double>> parse_scores(std::string_view text, const std::vector<int>& marker_ids) {
  static const std::regex kScore(R"([mM]\s*(\d+)\s*[:=]\s*([-+]?\d+(?:\.\d*)?|[-+]?\.\d+))");
  std::vector<double> scores(marker_ids.size(), 0.5);
  std::vector<bool> seen(marker_ids.size(), false);
  bool any = false;
  for (auto it = std::regex_iterator<std::string_view::const_iterator>(text.begin(), text.end(), kScore);
       it != std::regex_iterator<std::string_view::const_iterator>(); ++it) {
    any = true;
    int id = 0;
    double v = 0.0;
    try {
      id = std::stoi((*it)[1].str());
      v = std::stod((*it)[2].str());
    } catch (const std::exception&) {
      continue;
    }
    const auto pos = std::find(marker_ids.begin(), marker_ids.end(), id);
    if (pos == marker_ids.end()) continue;
    const auto k = static_cast<std::size_t>(pos - marker_ids.begin());
    // First mention wins.
    if (seen[k]) continue;
    seen[k] = true;
    scores[k] = std::clamp(v, 0.0, 1.0);
  }
  if (!any) return std::nullopt;
  return scores;
}

}  // namespace topv
