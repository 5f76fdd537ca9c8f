#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "plugwatt/aggregation.hpp"
#include "plugwatt/ingest.hpp"
#include "plugwatt/scoring.hpp"

namespace plugwatt::service {

using nlohmann::json;

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;

  std::optional<std::string> param(const std::string& k) const {
    auto it = query.find(k);
    if (it == query.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }
  std::optional<std::string> header(const std::string& k) const {
    auto it = headers.find(k);
    if (it == headers.end()) return std::nullopt;
    return it->second;
  }
};

struct Response {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;

  json json_body() const { return body.empty() ? json() : json::parse(body); }
};

struct WinnerRecord {
  Date date;
  std::string participant_id;
  int amount_usd = 0;
};

/// Heartbeats no further apart than this join the same session; the session
/// then extends this far past its last heartbeat.
inline constexpr std::int64_t kHeartbeatGapS = 30;

struct HeartbeatRun {
  Instant first;
  Instant last;
  ScreentimeSession session(const std::string& p) const {
    return {p, first, last + Seconds{kHeartbeatGapS}};
  }
};

/// Immutable view of everything the read endpoints depend on.
struct Snapshot {
  std::uint64_t version = 0;
  std::uint64_t baseline_version = 0;  // bumps only when baseline-phase data changes
  PhaseCalendar calendar;
  ReadingIndex index;
  std::vector<ScreentimeSession> sessions;  // loaded from disk
  std::map<std::string, std::vector<HeartbeatRun>> heartbeats;
  IncentiveSchedule incentives;
  std::vector<ComfortReport> comfort;
  std::vector<WinnerRecord> winners;
  std::set<std::pair<std::string, Date>> acknowledged;

  std::vector<ScreentimeSession> all_sessions() const {
    auto out = sessions;
    for (const auto& [p, runs] : heartbeats)
      for (const auto& r : runs) out.push_back(r.session(p));
    return out;
  }

  bool knows(const std::string& participant) const {
    if (index.has_participant(participant) || heartbeats.count(participant)) return true;
    for (const auto& s : sessions)
      if (s.participant_id == participant) return true;
    return false;
  }
};

struct Config {
  std::optional<std::filesystem::path> data_dir;  // persistence target; none keeps state in memory
  Site site = Site::Nasa;
  SiteClock clock = SiteClock::from_name("America/Los_Angeles");
  ScoringConfig scoring;
  std::optional<std::string> operator_token;
  std::int64_t cache_ttl_s = 60;
  std::size_t max_series_points = 20000;
  std::function<Instant()> now = [] {
    return std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now());
  };
};

/// Reads PLUGWATT_DATA_DIR, PLUGWATT_SITE_TZ and PLUGWATT_OPERATOR_TOKEN over `base`.
inline Config config_from_env(Config base = {}) {
  if (const char* d = std::getenv("PLUGWATT_DATA_DIR"); d && *d) base.data_dir = d;
  if (const char* tz = std::getenv("PLUGWATT_SITE_TZ"); tz && *tz) base.clock = SiteClock::from_name(tz);
  if (const char* tok = std::getenv("PLUGWATT_OPERATOR_TOKEN"); tok && *tok) base.operator_token = tok;
  return base;
}

namespace detail {

inline Response reply(int status, const json& body) {
  Response r;
  r.status = status;
  r.body = body.dump();
  r.headers["Content-Type"] = "application/json";
  return r;
}

inline Response problem(int status, const std::string& msg) { return reply(status, {{"error", msg}}); }

inline json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::string etag_of(const std::string& body) {
  return "\"" + plugwatt::detail::hex64(plugwatt::detail::fnv1a(body)) + "\"";
}

inline void append_line(const std::filesystem::path& file, const std::string& header,
                        const std::string& rows) {
  const bool fresh = !std::filesystem::exists(file) || std::filesystem::file_size(file) == 0;
  std::ofstream out(file, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to " + file.string());
  if (fresh) out << header;
  out << rows;
}

inline void write_text_atomic(const std::filesystem::path& file, const std::string& text) {
  auto tmp = file;
  tmp += ".tmp";
  plugwatt::detail::write_text(tmp, text);
  std::filesystem::rename(tmp, file);
}

}  // namespace detail

class Service {
 public:
  explicit Service(Dataset data, Config cfg = {}) : cfg_(std::move(cfg)) {
    auto s = std::make_shared<Snapshot>();
    s->calendar = std::move(data.calendar);
    s->index = ReadingIndex(data.readings);
    s->sessions = std::move(data.sessions);
    s->incentives = std::move(data.incentives);
    s->comfort = std::move(data.comfort);
    if (cfg_.data_dir) load_winners(*s);
    snapshot_ = std::move(s);
  }

  /// Opens a persisted dataset directory. The site is `site` if given, else
  /// the manifest's single site, else `cfg.site` when the calendar covers it.
  static std::unique_ptr<Service> open(const std::filesystem::path& dir, Config cfg,
                                       std::optional<Site> site = std::nullopt) {
    auto loaded = load_dataset(dir);
    if (!loaded.report.accepted()) throw Error("dataset at " + dir.string() + " failed validation");
    cfg.data_dir = dir;
    if (!std::getenv("PLUGWATT_SITE_TZ") || !*std::getenv("PLUGWATT_SITE_TZ"))
      cfg.clock = SiteClock::from_name(loaded.manifest.timezone);
    if (site) {
      cfg.site = *site;
    } else if (auto s = parse_site(loaded.manifest.site)) {
      cfg.site = *s;
    } else if (auto sites = loaded.data.calendar.sites(); !sites.empty() && !sites.count(cfg.site)) {
      cfg.site = *sites.begin();
    }
    return std::make_unique<Service>(std::move(loaded.data), std::move(cfg));
  }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lk(snap_mu_);
    return snapshot_;
  }

  const Config& config() const { return cfg_; }

  /// Baselines for the configured site on `snap`; empty when there is no
  /// baseline phase or no participant has active baseline data.
  std::shared_ptr<const std::vector<BaselineRecord>> baselines(const Snapshot& snap) const {
    std::lock_guard lk(cache_mu_);
    auto it = baseline_cache_.find(snap.baseline_version);
    if (it != baseline_cache_.end()) return it->second;
    auto recs = std::make_shared<std::vector<BaselineRecord>>();
    if (const Phase* b = snap.calendar.baseline(cfg_.site))
      *recs = compute_baselines(snap.index, *b, cfg_.clock, cfg_.scoring);
    baseline_cache_.clear();
    baseline_cache_[snap.baseline_version] = recs;
    return recs;
  }

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const json::exception& e) {
      return detail::problem(400, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
      return detail::problem(400, e.what());
    }
  }

 private:
  Response route(const Request& req) {
    const auto& m = req.method;
    const auto& p = req.path;
    if (m == "GET" && p == "/v1/health") return health();
    if (m == "POST" && p == "/v1/readings") return post_readings(req);
    if (m == "GET" && p == "/v1/leaderboard") return get_leaderboard(req);
    if (m == "POST" && p == "/v1/incentives") return post_incentive(req);
    if (m == "GET" && p == "/v1/incentives") return get_incentive(req);
    if (m == "POST" && p == "/v1/comfort") return post_comfort(req);
    if (m == "GET" && p == "/v1/series") return get_series(req);
    if (m == "GET" && p == "/v1/sockets") return get_sockets(req);
    if (m == "GET" && p == "/v1/baseline") return get_baseline(req);
    if (m == "GET" && p == "/v1/phase") return get_phase(req);
    if (m == "POST" && p == "/v1/screentime-heartbeat") return post_heartbeat(req);
    if (m == "GET" && p == "/v1/screentime") return get_screentime(req);
    if (m == "GET" && p == "/v1/notifications") return get_notifications(req);
    if (m == "POST" && p == "/v1/notifications/ack") return post_ack(req);
    if (m == "POST" && p == "/v1/operator/declare-winner") return post_declare_winner(req);
    return detail::problem(404, "no route for " + m + " " + p);
  }

  // ---- helpers -----------------------------------------------------------

  bool operator_ok(const Request& req) const {
    if (!cfg_.operator_token) return true;
    if (auto t = req.header("x-operator-token"); t && *t == *cfg_.operator_token) return true;
    if (auto a = req.header("authorization"); a && *a == "Bearer " + *cfg_.operator_token) return true;
    return false;
  }

  /// Applies `mutate` to a copy of the current snapshot and publishes it.
  template <typename F>
  void commit(F&& mutate) {
    auto next = std::make_shared<Snapshot>(*snapshot());
    mutate(*next);
    ++next->version;
    std::lock_guard lk(snap_mu_);
    snapshot_ = std::move(next);
  }

  void load_winners(Snapshot& s) {
    auto file = *cfg_.data_dir / "winners.csv";
    if (!std::filesystem::exists(file)) return;
    auto t = csv::read_file(file.string());
    const auto c_d = t.column("date"), c_p = t.column("participant_id"), c_a = t.column("amount_usd");
    for (const auto& r : t.rows)
      s.winners.push_back({require_date(r.fields[c_d]), r.fields[c_p],
                           static_cast<int>(csv::to_integer(r.fields[c_a], t, r, "amount_usd"))});
  }

  Response health() const {
    auto s = snapshot();
    return detail::reply(200, {{"status", "ok"},
                               {"version", s->version},
                               {"site", to_string(cfg_.site)},
                               {"readings", s->index.size()}});
  }

  // ---- readings ----------------------------------------------------------

  Response post_readings(const Request& req) {
    json body = json::parse(req.body);
    const json* items = &body;
    if (body.is_object() && body.contains("readings")) items = &body["readings"];
    if (!items->is_array()) return detail::problem(400, "expected an array of readings");

    std::lock_guard wl(write_mu_);
    auto base = snapshot();
    std::map<std::pair<std::string, std::string>, std::shared_ptr<Stream>> touched;
    std::vector<PowerReading> accepted;
    json rejections = json::array();
    std::size_t duplicates = 0;
    bool baseline_hit = false;
    const Phase* baseline = base->calendar.baseline(cfg_.site);

    for (std::size_t i = 0; i < items->size(); ++i) {
      const json& it = (*items)[i];
      auto reject = [&](const std::string& why) { rejections.push_back({{"index", i}, {"reason", why}}); };
      if (!it.is_object()) {
        reject("item is not an object");
        continue;
      }
      auto str = [&](const char* k) -> std::optional<std::string> {
        if (!it.contains(k) || !it[k].is_string()) return std::nullopt;
        return it[k].get<std::string>();
      };
      auto ts_s = str("timestamp_utc");
      if (!ts_s) ts_s = str("timestamp");
      auto pid = str("participant_id");
      auto sid = str("socket_id");
      if (!ts_s || !pid || !sid || !it.contains("watts") || !it["watts"].is_number()) {
        reject("missing or mistyped field (timestamp_utc, participant_id, socket_id, watts)");
        continue;
      }
      auto ts = parse_instant(*ts_s);
      if (!ts) {
        reject("bad timestamp '" + *ts_s + "'");
        continue;
      }
      double w = it["watts"].get<double>();
      if (!std::isfinite(w) || w < 0) {
        reject("watts must be finite and >= 0");
        continue;
      }
      if (pid->empty() || sid->empty()) {
        reject("empty participant_id or socket_id");
        continue;
      }
      auto key = std::make_pair(*pid, *sid);
      auto& stream = touched[key];
      if (!stream) {
        auto cur = base->index.stream(*pid, *sid);
        stream = cur ? std::make_shared<Stream>(*cur) : std::make_shared<Stream>();
      }
      if (!stream->empty() && *ts <= stream->back().t) {
        auto pos = std::lower_bound(stream->begin(), stream->end(), *ts,
                                    [](const Sample& x, Instant t) { return x.t < t; });
        if (pos != stream->end() && pos->t == *ts) {
          ++duplicates;
        } else {
          reject("out of order: timestamp precedes the latest sample of " + *pid + "/" + *sid);
        }
        continue;
      }
      stream->push_back({*ts, w});
      accepted.push_back({*ts, *pid, *sid, w});
      if (baseline) {
        Date local = cfg_.clock.local_date(*ts);
        if (baseline->contains(local)) baseline_hit = true;
      }
    }

    const std::size_t n_rej = rejections.size();
    if (!accepted.empty()) {
      if (cfg_.data_dir) {
        std::string rows;
        for (const auto& r : accepted) rows += reading_row(r);
        detail::append_line(*cfg_.data_dir / "readings.csv",
                            "timestamp_utc,participant_id,socket_id,watts\n", rows);
      }
      commit([&](Snapshot& s) {
        for (auto& [k, stream] : touched) s.index.set_stream(k.first, k.second, std::move(stream));
        if (baseline_hit) ++s.baseline_version;
      });
    }
    json out = {{"accepted", accepted.size()},
                {"rejected", n_rej},
                {"duplicates", duplicates},
                {"rejections", rejections}};
    const int status = accepted.empty() && n_rej > 0 ? 422 : 202;
    return detail::reply(status, out);
  }

  // ---- leaderboard -------------------------------------------------------

  Response get_leaderboard(const Request& req) {
    auto date_s = req.param("date");
    if (!date_s) return detail::problem(400, "query parameter 'date' is required");
    auto date = parse_date(*date_s);
    if (!date) return detail::problem(400, "bad date '" + *date_s + "'");
    const Instant day_end = cfg_.clock.local_midnight(*date + std::chrono::days{1});
    Instant as_of = day_end;
    if (auto a = req.param("as_of")) {
      auto t = parse_instant(*a);
      if (!t) return detail::problem(400, "bad as_of '" + *a + "'");
      as_of = *t;
    }
    if (as_of <= cfg_.clock.local_midnight(*date) || as_of > day_end)
      return detail::problem(400, "as_of must fall within the local date");

    auto snap = snapshot();
    const std::string key = format_date(*date) + "|" + format_instant(as_of) + "|" +
                            std::to_string(snap->version);
    const auto steady = std::chrono::steady_clock::now();
    {
      std::lock_guard lk(cache_mu_);
      auto it = board_cache_.find(key);
      if (it != board_cache_.end() && steady - it->second.created < std::chrono::seconds(cfg_.cache_ttl_s))
        return cached(req, it->second);
    }
    auto base = baselines(*snap);
    if (base->empty()) return detail::problem(409, "baselines are not available for this site");
    auto board = build_leaderboard(snap->index, *base, *date, as_of, cfg_.clock, cfg_.scoring);
    json entries = json::array();
    for (const auto& e : board)
      entries.push_back({{"participant_id", e.participant_id},
                         {"score", e.score},
                         {"rank", e.rank},
                         {"inactive_flag", e.inactive_flag}});
    json incentive = nullptr;
    if (const Phase* ph = snap->calendar.phase_at(cfg_.site, *date); ph && bears_incentive(ph->kind))
      if (auto amt = snap->incentives.amount_on(*date)) incentive = *amt;
    json out = {{"date", format_date(*date)},
                {"as_of", format_instant(as_of)},
                {"site", to_string(cfg_.site)},
                {"incentive_usd", incentive},
                {"entries", entries}};
    CachedBody cb{out.dump(), "", steady};
    cb.etag = detail::etag_of(cb.body);
    {
      std::lock_guard lk(cache_mu_);
      for (auto it = board_cache_.begin(); it != board_cache_.end();) {
        if (steady - it->second.created >= std::chrono::seconds(cfg_.cache_ttl_s))
          it = board_cache_.erase(it);
        else
          ++it;
      }
      if (board_cache_.size() > 512) board_cache_.clear();
      board_cache_[key] = cb;
    }
    return cached(req, cb);
  }

  struct CachedBody {
    std::string body;
    std::string etag;
    std::chrono::steady_clock::time_point created;
  };

  Response cached(const Request& req, const CachedBody& cb) const {
    Response r;
    r.headers["ETag"] = cb.etag;
    r.headers["Cache-Control"] = "max-age=" + std::to_string(cfg_.cache_ttl_s);
    if (auto inm = req.header("if-none-match"); inm && *inm == cb.etag) {
      r.status = 304;
      return r;
    }
    r.status = 200;
    r.body = cb.body;
    r.headers["Content-Type"] = "application/json";
    return r;
  }

  // ---- incentives --------------------------------------------------------

  Response post_incentive(const Request& req) {
    if (!operator_ok(req)) return detail::problem(401, "operator token required");
    json body = json::parse(req.body);
    if (!body.is_object() || !body.contains("date") || !body["date"].is_string() ||
        !body.contains("amount_usd") || !body["amount_usd"].is_number())
      return detail::problem(400, "expected {date, amount_usd}");
    auto date = parse_date(body["date"].get<std::string>());
    if (!date) return detail::problem(400, "bad date");
    const double amt = body["amount_usd"].get<double>();
    if (amt != std::floor(amt) || !valid_incentive_amount(static_cast<int>(amt)))
      return detail::problem(422, "amount_usd must be one of 5, 10, ..., 50");
    std::lock_guard wl(write_mu_);
    if (snapshot()->incentives.amount_on(*date))
      return detail::problem(409, "an incentive is already posted for " + format_date(*date));
    IncentiveSchedule::Entry e{*date, static_cast<int>(amt)};
    if (cfg_.data_dir)
      detail::append_line(*cfg_.data_dir / "incentives.csv", "date,amount_usd\n", incentive_row(e));
    commit([&](Snapshot& s) { s.incentives.add(e.date, e.amount_usd); });
    return detail::reply(201, {{"date", format_date(e.date)}, {"amount_usd", e.amount_usd}});
  }

  Response get_incentive(const Request& req) const {
    auto date_s = req.param("date");
    if (!date_s) return detail::problem(400, "query parameter 'date' is required");
    auto date = parse_date(*date_s);
    if (!date) return detail::problem(400, "bad date");
    auto amt = snapshot()->incentives.amount_on(*date);
    return detail::reply(200, {{"date", *date_s}, {"amount_usd", amt ? json(*amt) : json(nullptr)}});
  }

  // ---- comfort -----------------------------------------------------------

  Response post_comfort(const Request& req) {
    json body = json::parse(req.body);
    auto pid = body.value("participant", body.value("participant_id", std::string()));
    if (pid.empty() || !body.contains("level") || !body["level"].is_number_integer())
      return detail::problem(400, "expected {participant, level}");
    const int level = body["level"].get<int>();
    if (!valid_comfort_level(level)) return detail::problem(422, "level must be in -3..3");
    std::lock_guard wl(write_mu_);
    if (!snapshot()->knows(pid)) return detail::problem(404, "unknown participant '" + pid + "'");
    ComfortReport c{pid, cfg_.now(), level};
    if (cfg_.data_dir)
      detail::append_line(*cfg_.data_dir / "comfort.csv", "participant_id,timestamp_utc,level\n",
                          comfort_row(c));
    commit([&](Snapshot& s) { s.comfort.push_back(c); });
    return detail::reply(201, {{"participant", pid},
                               {"level", level},
                               {"timestamp_utc", format_instant(c.timestamp)}});
  }

  // ---- series and sockets ------------------------------------------------

  Response get_series(const Request& req) const {
    auto pid = req.param("participant");
    auto from_s = req.param("from");
    auto to_s = req.param("to");
    if (!pid || !from_s || !to_s) return detail::problem(400, "participant, from and to are required");
    auto from = parse_instant(*from_s);
    auto to = parse_instant(*to_s);
    if (!from || !to || *to <= *from) return detail::problem(400, "bad from/to range");
    std::int64_t res = 300;
    if (auto r = req.param("resolution")) {
      try {
        res = std::stoll(*r);
      } catch (const std::exception&) {
        return detail::problem(400, "bad resolution");
      }
    }
    if (res < 1) return detail::problem(400, "resolution must be >= 1 s");
    const auto span = (*to - *from).count();
    if (static_cast<std::size_t>((span + res - 1) / res) > cfg_.max_series_points)
      return detail::problem(400, "too many points; raise resolution");
    auto snap = snapshot();
    if (!snap->knows(*pid)) return detail::problem(404, "unknown participant '" + *pid + "'");
    auto everyone = snap->index.participants();
    json points = json::array();
    for (Instant t = *from; t < *to; t += Seconds{res}) {
      Instant e = std::min(*to, t + Seconds{res});
      std::optional<double> pool;
      double sum = 0;
      std::size_t n = 0;
      for (const auto& q : everyone)
        if (auto v = interval_mean_power(snap->index, q, t, e)) {
          sum += *v;
          ++n;
        }
      if (n) pool = sum / static_cast<double>(n);
      points.push_back({{"t", format_instant(t)},
                        {"individual", detail::number_or_null(interval_mean_power(snap->index, *pid, t, e))},
                        {"pool", detail::number_or_null(pool)}});
    }
    return detail::reply(200, {{"participant", *pid}, {"resolution_s", res}, {"points", points}});
  }

  Response get_sockets(const Request& req) const {
    auto pid = req.param("participant");
    if (!pid) return detail::problem(400, "participant is required");
    auto snap = snapshot();
    if (!snap->knows(*pid)) return detail::problem(404, "unknown participant '" + *pid + "'");
    json sockets = json::array();
    double total = 0;
    if (const auto* m = snap->index.sockets(*pid))
      for (const auto& [sid, s] : *m) {
        if (s->empty()) continue;
        sockets.push_back({{"socket_id", sid},
                           {"watts", s->back().watts},
                           {"timestamp_utc", format_instant(s->back().t)}});
        total += s->back().watts;
      }
    return detail::reply(200, {{"participant", *pid}, {"total_watts", total}, {"sockets", sockets}});
  }

  Response get_baseline(const Request& req) const {
    auto pid = req.param("participant");
    if (!pid) return detail::problem(400, "participant is required");
    auto snap = snapshot();
    auto base = baselines(*snap);
    if (base->empty()) return detail::problem(409, "baselines are not available for this site");
    for (const auto& b : *base)
      if (b.participant_id == *pid)
        return detail::reply(200, {{"participant", *pid},
                                   {"active_baseline_watts", b.active_baseline_watts},
                                   {"always_on_floor_watts", b.always_on_floor_watts},
                                   {"computed_from", b.computed_from}});
    return detail::problem(404, "no baseline for participant '" + *pid + "'");
  }

  Response get_phase(const Request& req) const {
    auto date_s = req.param("date");
    if (!date_s) return detail::problem(400, "query parameter 'date' is required");
    auto date = parse_date(*date_s);
    if (!date) return detail::problem(400, "bad date");
    auto snap = snapshot();
    const Phase* ph = snap->calendar.phase_at(cfg_.site, *date);
    if (!ph) return detail::reply(200, {{"date", *date_s}, {"site", to_string(cfg_.site)}, {"phase", nullptr}});
    return detail::reply(200, {{"date", *date_s},
                               {"site", to_string(cfg_.site)},
                               {"phase", {{"label", ph->label},
                                          {"kind", to_string(ph->kind)},
                                          {"start_date", format_date(ph->start_date)},
                                          {"end_date", format_date(ph->end_date)}}}});
  }

  // ---- screentime --------------------------------------------------------

  Response post_heartbeat(const Request& req) {
    json body = json::parse(req.body);
    auto pid = body.value("participant", body.value("participant_id", std::string()));
    if (pid.empty()) return detail::problem(400, "expected {participant}");
    std::lock_guard wl(write_mu_);
    auto snap = snapshot();
    if (!snap->knows(pid)) return detail::problem(404, "unknown participant '" + pid + "'");
    const Instant t = cfg_.now();
    commit([&](Snapshot& s) {
      auto& runs = s.heartbeats[pid];
      if (runs.empty() || (t - runs.back().last).count() > kHeartbeatGapS)
        runs.push_back({t, t});
      else
        runs.back().last = std::max(runs.back().last, t);
    });
    if (cfg_.data_dir) {
      auto now = snapshot();
      detail::write_text_atomic(*cfg_.data_dir / "screentime.csv", screentime_csv(now->all_sessions()));
    }
    Response r;
    r.status = 204;
    return r;
  }

  Response get_screentime(const Request& req) const {
    auto pid = req.param("participant");
    if (!pid) return detail::problem(400, "participant is required");
    auto snap = snapshot();
    if (!snap->knows(*pid)) return detail::problem(404, "unknown participant '" + *pid + "'");
    std::vector<ScreentimeSession> mine;
    for (auto& s : snap->all_sessions())
      if (s.participant_id == *pid) mine.push_back(s);
    auto merged = merge_sessions(std::move(mine)).sessions;
    json sessions = json::array();
    std::int64_t total = 0;
    for (const auto& s : merged) {
      sessions.push_back({{"start", format_instant(s.session_start)}, {"end", format_instant(s.session_end)}});
      total += s.duration();
    }
    return detail::reply(200, {{"participant", *pid}, {"total_seconds", total}, {"sessions", sessions}});
  }

  // ---- winners -----------------------------------------------------------

  Response post_declare_winner(const Request& req) {
    if (!operator_ok(req)) return detail::problem(401, "operator token required");
    json body = json::parse(req.body);
    if (!body.contains("date") || !body["date"].is_string()) return detail::problem(400, "expected {date}");
    auto date = parse_date(body["date"].get<std::string>());
    if (!date) return detail::problem(400, "bad date");
    std::lock_guard wl(write_mu_);
    auto snap = snapshot();
    for (const auto& w : snap->winners)
      if (w.date == *date) return detail::problem(409, "winner already declared for " + format_date(*date));
    auto base = baselines(*snap);
    if (base->empty()) return detail::problem(409, "baselines are not available for this site");
    auto who = declare_winner(snap->index, *base, snap->calendar, snap->incentives, cfg_.site, *date,
                              cfg_.clock, cfg_.scoring);
    if (!who) return detail::reply(200, {{"date", format_date(*date)}, {"winner", nullptr}});
    WinnerRecord w{*date, *who, *snap->incentives.amount_on(*date)};
    if (cfg_.data_dir)
      detail::append_line(*cfg_.data_dir / "winners.csv", "date,participant_id,amount_usd\n",
                          format_date(w.date) + "," + csv::quote(w.participant_id) + "," +
                              std::to_string(w.amount_usd) + "\n");
    commit([&](Snapshot& s) { s.winners.push_back(w); });
    return detail::reply(201, {{"date", format_date(w.date)},
                               {"winner", w.participant_id},
                               {"amount_usd", w.amount_usd}});
  }

  Response get_notifications(const Request& req) const {
    auto pid = req.param("participant");
    if (!pid) return detail::problem(400, "participant is required");
    auto snap = snapshot();
    json n = nullptr;
    // newest unacknowledged win
    for (auto it = snap->winners.rbegin(); it != snap->winners.rend(); ++it) {
      if (it->participant_id != *pid || snap->acknowledged.count({*pid, it->date})) continue;
      n = {{"date", format_date(it->date)}, {"participant_id", *pid}, {"amount_usd", it->amount_usd}};
      break;
    }
    return detail::reply(200, {{"participant", *pid}, {"notification", n}});
  }

  Response post_ack(const Request& req) {
    json body = json::parse(req.body);
    auto pid = body.value("participant", std::string());
    auto date = parse_date(body.value("date", std::string()));
    if (pid.empty() || !date) return detail::problem(400, "expected {participant, date}");
    std::lock_guard wl(write_mu_);
    commit([&](Snapshot& s) { s.acknowledged.insert({pid, *date}); });
    Response r;
    r.status = 204;
    return r;
  }

  Config cfg_;
  mutable std::mutex snap_mu_;   // guards the snapshot pointer only
  std::mutex write_mu_;          // serializes writers
  mutable std::mutex cache_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  mutable std::map<std::uint64_t, std::shared_ptr<const std::vector<BaselineRecord>>> baseline_cache_;
  std::map<std::string, CachedBody> board_cache_;
};

}  // namespace plugwatt::service
