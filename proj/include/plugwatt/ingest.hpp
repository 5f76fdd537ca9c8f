#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "plugwatt/core.hpp"
#include "plugwatt/csv.hpp"
#include "plugwatt/demand.hpp"

namespace plugwatt {

inline constexpr int kSchemaVersion = 1;

struct Manifest {
  int schema_version = kSchemaVersion;
  std::string site;  // "NASA", "CMU" or "NASA,CMU"
  std::uint64_t seed = 0;
  std::string timezone = "America/Los_Angeles";
  nlohmann::json truth = nlohmann::json::object();  // generator ground truth, if synthetic
  std::string hash;  // FNV-1a over the data files, filled on save and load

  friend bool operator==(const Manifest& a, const Manifest& b) {
    return a.schema_version == b.schema_version && a.site == b.site && a.seed == b.seed &&
           a.timezone == b.timezone && a.truth == b.truth;
  }
};

struct LoadedDataset {
  Dataset data;
  Manifest manifest;
  ValidationReport report;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("write failed: " + p.string());
}

inline const char* const kDataFiles[] = {"phases.csv", "readings.csv", "screentime.csv",
                                         "incentives.csv", "comfort.csv"};

}  // namespace detail

/// Content hash of the data files in `dir`, independent of the manifest itself.
inline std::string dataset_hash(const std::filesystem::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* f : detail::kDataFiles) {
    h = detail::fnv1a(f, h);
    h = detail::fnv1a(detail::slurp(dir / f), h);
  }
  return detail::hex64(h);
}

// ---------------------------------------------------------------------------
// Per-file serializers, usable on their own (the service appends with them).

inline std::string phases_csv(const PhaseCalendar& cal) {
  std::ostringstream os;
  csv::Writer w(os);
  w.row({"site", "kind", "label", "start_date", "end_date"});
  for (const auto& p : cal.phases())
    w.row({to_string(p.site), to_string(p.kind), p.label, format_date(p.start_date),
           format_date(p.end_date)});
  return os.str();
}

inline std::string reading_row(const PowerReading& r) {
  return format_instant(r.timestamp) + "," + csv::quote(r.participant_id) + "," +
         csv::quote(r.socket_id) + "," + csv::format_double(r.watts) + "\n";
}

inline std::string readings_csv(std::span<const PowerReading> readings) {
  std::string out = "timestamp_utc,participant_id,socket_id,watts\n";
  out.reserve(readings.size() * 48);
  for (const auto& r : readings) out += reading_row(r);
  return out;
}

inline std::string session_row(const ScreentimeSession& s) {
  return csv::quote(s.participant_id) + "," + format_instant(s.session_start) + "," +
         format_instant(s.session_end) + "\n";
}

inline std::string screentime_csv(std::span<const ScreentimeSession> sessions) {
  std::string out = "participant_id,session_start_utc,session_end_utc\n";
  for (const auto& s : sessions) out += session_row(s);
  return out;
}

inline std::string incentive_row(const IncentiveSchedule::Entry& e) {
  return format_date(e.date) + "," + std::to_string(e.amount_usd) + "\n";
}

inline std::string incentives_csv(const IncentiveSchedule& sched) {
  std::string out = "date,amount_usd\n";
  for (const auto& e : sched.entries()) out += incentive_row(e);
  return out;
}

inline std::string comfort_row(const ComfortReport& c) {
  return csv::quote(c.participant_id) + "," + format_instant(c.timestamp) + "," +
         std::to_string(c.level) + "\n";
}

inline std::string comfort_csv(std::span<const ComfortReport> reports) {
  std::string out = "participant_id,timestamp_utc,level\n";
  for (const auto& c : reports) out += comfort_row(c);
  return out;
}

inline std::string manifest_json(const Manifest& m) {
  nlohmann::json j = {{"schema_version", m.schema_version}, {"site", m.site},
                      {"seed", m.seed},                     {"timezone", m.timezone},
                      {"truth", m.truth},                   {"hash", m.hash}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Parsers

namespace detail {

inline Instant instant_field(const csv::Table& t, const csv::Row& r, std::size_t col,
                             std::string_view name) {
  auto v = parse_instant(r.fields[col]);
  if (!v) throw ParseError(t.file, r.line, "column '" + std::string(name) + "': bad timestamp '" + r.fields[col] + "'");
  return *v;
}

inline Date date_field(const csv::Table& t, const csv::Row& r, std::size_t col,
                       std::string_view name) {
  auto v = parse_date(r.fields[col]);
  if (!v) throw ParseError(t.file, r.line, "column '" + std::string(name) + "': bad date '" + r.fields[col] + "'");
  return *v;
}

}  // namespace detail

inline PhaseCalendar parse_phases(const csv::Table& t) {
  const auto c_site = t.column("site"), c_kind = t.column("kind"), c_label = t.column("label"),
             c_start = t.column("start_date"), c_end = t.column("end_date");
  std::vector<Phase> phases;
  for (const auto& r : t.rows) {
    auto site = parse_site(r.fields[c_site]);
    if (!site) throw ParseError(t.file, r.line, "column 'site': unknown site '" + r.fields[c_site] + "'");
    auto kind = parse_phase_kind(r.fields[c_kind]);
    if (!kind) throw ParseError(t.file, r.line, "column 'kind': unknown kind '" + r.fields[c_kind] + "'");
    phases.push_back({*site, *kind, r.fields[c_label], detail::date_field(t, r, c_start, "start_date"),
                      detail::date_field(t, r, c_end, "end_date")});
  }
  return PhaseCalendar{std::move(phases)};
}

inline std::vector<PowerReading> parse_readings(const csv::Table& t) {
  const auto c_ts = t.column("timestamp_utc"), c_p = t.column("participant_id"),
             c_s = t.column("socket_id"), c_w = t.column("watts");
  std::vector<PowerReading> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows)
    out.push_back({detail::instant_field(t, r, c_ts, "timestamp_utc"), r.fields[c_p], r.fields[c_s],
                   csv::to_double(r.fields[c_w], t, r, "watts")});
  return out;
}

inline std::vector<ScreentimeSession> parse_screentime(const csv::Table& t) {
  const auto c_p = t.column("participant_id"), c_a = t.column("session_start_utc"),
             c_b = t.column("session_end_utc");
  std::vector<ScreentimeSession> out;
  for (const auto& r : t.rows)
    out.push_back({r.fields[c_p], detail::instant_field(t, r, c_a, "session_start_utc"),
                   detail::instant_field(t, r, c_b, "session_end_utc")});
  return out;
}

inline IncentiveSchedule parse_incentives(const csv::Table& t) {
  const auto c_d = t.column("date"), c_a = t.column("amount_usd");
  IncentiveSchedule s;
  for (const auto& r : t.rows)
    s.add(detail::date_field(t, r, c_d, "date"),
          static_cast<int>(csv::to_integer(r.fields[c_a], t, r, "amount_usd")));
  return s;
}

inline std::vector<ComfortReport> parse_comfort(const csv::Table& t) {
  const auto c_p = t.column("participant_id"), c_t = t.column("timestamp_utc"),
             c_l = t.column("level");
  std::vector<ComfortReport> out;
  for (const auto& r : t.rows)
    out.push_back({r.fields[c_p], detail::instant_field(t, r, c_t, "timestamp_utc"),
                   static_cast<int>(csv::to_integer(r.fields[c_l], t, r, "level"))});
  return out;
}

/// CSV of (date, hour 1..24, kw) into hourly loads for `ingest_profile`.
inline std::vector<HourlyLoad> parse_hourly_load(const csv::Table& t) {
  const auto c_d = t.column("date"), c_h = t.column("hour"), c_k = t.column("kw");
  std::vector<HourlyLoad> out;
  for (const auto& r : t.rows)
    out.push_back({detail::date_field(t, r, c_d, "date"),
                   static_cast<int>(csv::to_integer(r.fields[c_h], t, r, "hour")),
                   csv::to_double(r.fields[c_k], t, r, "kw")});
  return out;
}

/// Hour-of-day profile file: hour (1..24), mean_kw, std_kw.
inline CyclostationaryProfile parse_profile(const csv::Table& t) {
  const auto c_h = t.column("hour"), c_m = t.column("mean_kw"), c_s = t.column("std_kw");
  CyclostationaryProfile p;
  std::array<bool, 24> seen{};
  for (const auto& r : t.rows) {
    const auto h = csv::to_integer(r.fields[c_h], t, r, "hour");
    if (h < 1 || h > 24) throw ParseError(t.file, r.line, "hour must be in 1..24");
    if (seen[h - 1]) throw ParseError(t.file, r.line, "hour " + std::to_string(h) + " repeated");
    seen[h - 1] = true;
    p.hours[h - 1] = {csv::to_double(r.fields[c_m], t, r, "mean_kw"), csv::to_double(r.fields[c_s], t, r, "std_kw")};
  }
  for (int h = 0; h < 24; ++h)
    if (!seen[h]) throw ParseError(t.file, 0, "hour " + std::to_string(h + 1) + " missing");
  p.days = 1;
  return p;
}

inline std::string profile_csv(const CyclostationaryProfile& p) {
  std::string out = "hour,mean_kw,std_kw\n";
  for (int h = 0; h < 24; ++h)
    out += std::to_string(h + 1) + "," + csv::format_double(p.hours[h].mean_kw) + "," +
           csv::format_double(p.hours[h].std_kw) + "\n";
  return out;
}

/// Per-epoch simulation inputs, repeated cyclically over the horizon.
/// Columns: incentive_usd and, optionally, screentime_prev_s.
inline std::vector<EpochInput> parse_scenario(const csv::Table& t) {
  const auto c_i = t.column("incentive_usd");
  const auto c_s = t.find_column("screentime_prev_s");
  std::vector<EpochInput> out;
  for (const auto& r : t.rows) {
    EpochInput in;
    in.incentive_usd = csv::to_double(r.fields[c_i], t, r, "incentive_usd");
    if (c_s) in.screentime_prev_s = csv::to_double(r.fields[*c_s], t, r, "screentime_prev_s");
    out.push_back(in);
  }
  return out;
}

inline Manifest parse_manifest(const std::string& text, const std::string& file) {
  Manifest m;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(file + ": " + e.what());
  }
  if (!j.contains("schema_version")) throw Error(file + ": missing key 'schema_version'");
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != kSchemaVersion)
    throw Error(file + ": unsupported schema_version " + std::to_string(m.schema_version));
  m.site = j.value("site", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.timezone = j.value("timezone", std::string("America/Los_Angeles"));
  if (j.contains("truth")) m.truth = j["truth"];
  return m;
}

// ---------------------------------------------------------------------------
// Directory round trip

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir, Manifest manifest = {}) {
  std::filesystem::create_directories(dir);
  detail::write_text(dir / "phases.csv", phases_csv(ds.calendar));
  detail::write_text(dir / "readings.csv", readings_csv(ds.readings));
  detail::write_text(dir / "screentime.csv", screentime_csv(ds.sessions));
  detail::write_text(dir / "incentives.csv", incentives_csv(ds.incentives));
  if (!ds.comfort.empty())
    detail::write_text(dir / "comfort.csv", comfort_csv(ds.comfort));
  else
    std::filesystem::remove(dir / "comfort.csv");
  if (manifest.site.empty()) {
    for (Site s : ds.calendar.sites())
      manifest.site += (manifest.site.empty() ? "" : ",") + std::string(to_string(s));
  }
  manifest.hash = dataset_hash(dir);
  detail::write_text(dir / "manifest.json", manifest_json(manifest));
}

/// Reads a dataset directory and validates it. Parse errors throw with file
/// and line; domain violations are returned in the report.
inline LoadedDataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a dataset directory: " + dir.string());
  LoadedDataset out;
  auto need = [&](const char* f) {
    auto p = dir / f;
    if (!std::filesystem::exists(p)) throw Error("missing file " + p.string());
    return csv::read_file(p.string());
  };
  out.data.calendar = parse_phases(need("phases.csv"));
  out.data.readings = parse_readings(need("readings.csv"));
  out.data.sessions = parse_screentime(need("screentime.csv"));
  out.data.incentives = parse_incentives(need("incentives.csv"));
  if (std::filesystem::exists(dir / "comfort.csv"))
    out.data.comfort = parse_comfort(csv::read_file((dir / "comfort.csv").string()));
  auto mpath = dir / "manifest.json";
  if (std::filesystem::exists(mpath)) out.manifest = parse_manifest(detail::slurp(mpath), mpath.string());
  out.manifest.hash = dataset_hash(dir);
  out.report = validate_dataset(out.data);
  return out;
}

}  // namespace plugwatt
