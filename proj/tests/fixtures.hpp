#pragma once

// Shared builders for the service tests and the acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "plugwatt/service.hpp"
#include "plugwatt/synth.hpp"

namespace fixture {

using namespace plugwatt;

/// Small CMU deployment: one baseline week then two incentive weeks.
inline SynthConfig small_site(std::uint64_t seed, std::size_t participants = 4) {
  SynthConfig cfg;
  cfg.n_participants = participants;
  std::vector<std::pair<PhaseKind, int>> blocks{{PhaseKind::Incentive, 2}};
  cfg.calendar = consecutive_calendar(Site::Cmu, require_date("2016-10-10"), 1, blocks);
  cfg.sample_period_s = 300;
  cfg.reduction[PhaseKind::Incentive] = 0.1;
  cfg.seed = seed;
  return cfg;
}

inline service::Config cmu_config(Instant now) {
  service::Config c;
  c.site = Site::Cmu;
  c.now = [now] { return now; };
  return c;
}

inline service::Request get(std::string path, std::map<std::string, std::string> query = {}) {
  return {"GET", std::move(path), std::move(query), {}, {}};
}

inline service::Request post(std::string path, const nlohmann::json& body) {
  return {"POST", std::move(path), {}, {}, body.dump()};
}

/// True when a leaderboard response lists exactly `expected` in order.
inline bool board_matches(const nlohmann::json& body, const std::vector<ScoreEntry>& expected,
                          std::string* why = nullptr) {
  const auto& entries = body.at("entries");
  auto fail = [&](std::string m) {
    if (why) *why = std::move(m);
    return false;
  };
  if (entries.size() != expected.size())
    return fail("size " + std::to_string(entries.size()) + " vs " + std::to_string(expected.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& e = entries[i];
    if (e.at("participant_id") != expected[i].participant_id) return fail("id at " + std::to_string(i));
    if (e.at("rank") != expected[i].rank) return fail("rank at " + std::to_string(i));
    if (e.at("inactive_flag") != expected[i].inactive_flag) return fail("flag at " + std::to_string(i));
    if (e.at("score").get<double>() != expected[i].score) return fail("score at " + std::to_string(i));
  }
  return true;
}

}  // namespace fixture
