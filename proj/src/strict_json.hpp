#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsrd/geometry.hpp"

namespace bsrd::detail {

inline size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Strict-mode key validation: every key must be known; unknown keys
/// are rejected with a nearest-key suggestion when one is close.
inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& known,
                                const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
    std::string best;
    size_t best_d = 1000;
    for (const auto& k : known) {
      const size_t d = edit_distance(it.key(), k);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    std::string msg = "unknown key \"" + (path.empty() ? it.key() : path + "." + it.key()) + "\"";
    if (best_d <= std::max<size_t>(2, it.key().size() / 3))
      msg += " (did you mean \"" + best + "\"?)";
    throw ConfigError(msg);
  }
}

}  // namespace bsrd::detail
