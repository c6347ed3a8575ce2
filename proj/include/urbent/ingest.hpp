#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "urbent/csv.hpp"
#include "urbent/geo.hpp"
#include "urbent/text.hpp"
#include "urbent/timeutil.hpp"

namespace urbent {

/// Unrecoverable input problem: unreadable source or missing/invalid header.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhotoRecord {
  std::string id;
  GeoPoint point;
  EpochSeconds taken_at = 0;
  std::string user_id;
  std::vector<std::string> tags;  ///< normalized, in file order, duplicates kept
};

enum class PoiCategory : std::uint8_t {
  ArtsEntertainment,
  CollegeUniversity,
  Event,
  Food,
  NightlifeSpot,
  OutdoorsRecreation,
  ProfessionalOther,
  Residence,
  ShopService,
  TravelTransport,
  Other,
};

inline constexpr std::size_t kPoiCategoryCount = 11;

inline constexpr std::array<std::string_view, kPoiCategoryCount> kPoiCategoryNames = {
    "Arts & Entertainment", "College & University",        "Event",     "Food",
    "Nightlife Spot",       "Outdoors & Recreation",       "Professional & Other Places",
    "Residence",            "Shop & Service",              "Travel & Transport",
    "Other",
};

inline std::string_view category_name(PoiCategory c) {
  return kPoiCategoryNames[static_cast<std::size_t>(c)];
}

/// Case-insensitive match against the ten top-level categories (and "Other").
/// "Night-life Spot" is accepted as an alias of "Nightlife Spot".
inline std::optional<PoiCategory> parse_category(std::string_view raw) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  };
  const std::string key = lower(trim(raw));
  if (key == "night-life spot") return PoiCategory::NightlifeSpot;
  for (std::size_t i = 0; i < kPoiCategoryCount; ++i) {
    if (key == lower(kPoiCategoryNames[i])) return static_cast<PoiCategory>(i);
  }
  return std::nullopt;
}

struct PoiRecord {
  std::string id;
  GeoPoint point;
  PoiCategory category = PoiCategory::Other;
};

/// Ground-truth label for synthetic noise records.
inline constexpr int kNoiseLabel = -1;

struct Dataset {
  std::vector<PhotoRecord> photos;
  std::vector<PoiRecord> pois;
  BoundingBox bbox;
  /// Record id -> generating blob index (or kNoiseLabel). Synthetic data only.
  std::optional<std::map<std::string, int>> ground_truth;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> reasons;   ///< rejection reason -> count
  std::map<std::string, std::size_t> counters;  ///< non-rejecting observations

  void reject(const std::string& reason) {
    ++rejected;
    ++reasons[reason];
  }
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  IngestReport report;
};

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Maps required column names to their position in the header.
template <std::size_t N>
std::array<std::size_t, N> resolve_header(std::istream& in,
                                          const std::array<std::string_view, N>& required,
                                          std::size_t& width) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Tolerate a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  auto fields = csv::split_record(line);
  if (!fields) throw IngestError("unparseable header line");
  width = fields->size();
  std::array<std::size_t, N> pos{};
  for (std::size_t k = 0; k < N; ++k) {
    bool found = false;
    for (std::size_t i = 0; i < fields->size(); ++i) {
      if ((*fields)[i] == required[k]) {
        pos[k] = i;
        found = true;
        break;
      }
    }
    if (!found) throw IngestError("header lacks column '" + std::string(required[k]) + "'");
  }
  return pos;
}

/// Reads data lines, handing each split record to `on_record`; accounts for
/// lines that cannot be split or have the wrong width.
template <typename OnRecord>
void for_each_record(std::istream& in, std::size_t width, IngestReport& report,
                     OnRecord&& on_record) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = csv::split_record(line);
    if (!fields || fields->size() != width) {
      report.reject(line.empty() ? "empty_line" : "malformed_line");
      continue;
    }
    on_record(*fields);
  }
  if (in.bad()) throw IngestError("read error");
}

inline std::optional<GeoPoint> parse_point(const std::string& lat, const std::string& lon) {
  GeoPoint p;
  if (!parse_double(lat, p.lat) || !parse_double(lon, p.lon) || !is_valid(p)) return std::nullopt;
  return p;
}

}  // namespace detail

/// Parses a photo CSV with header `id,lat,lon,taken_at,user_id,tags`.
/// Per-line problems are accounted in the report; only an unreadable stream
/// or a bad header throws. Timestamps after `now` are rejected.
inline ParseResult<PhotoRecord> parse_photos(std::istream& in, const BoundingBox& bbox,
                                             EpochSeconds now = now_epoch_seconds()) {
  static constexpr std::array<std::string_view, 6> kColumns = {"id",      "lat",     "lon",
                                                               "taken_at", "user_id", "tags"};
  ParseResult<PhotoRecord> out;
  std::size_t width = 0;
  const auto col = detail::resolve_header(in, kColumns, width);
  std::unordered_set<std::string> seen;

  detail::for_each_record(in, width, out.report, [&](std::vector<std::string>& f) {
    IngestReport& report = out.report;
    PhotoRecord rec;
    rec.id = std::move(f[col[0]]);
    if (rec.id.empty()) return report.reject("missing_id");
    auto point = detail::parse_point(f[col[1]], f[col[2]]);
    if (!point) return report.reject("bad_coordinate");
    if (!bbox_contains(bbox, *point)) return report.reject("out_of_bbox");
    auto ts = parse_iso8601_utc(f[col[3]]);
    if (!ts || *ts < kMinPhotoTimestamp || *ts > now) return report.reject("bad_timestamp");
    if (seen.contains(rec.id)) return report.reject("duplicate_id");

    rec.point = *point;
    rec.taken_at = *ts;
    rec.user_id = std::move(f[col[4]]);
    std::string_view tags = f[col[5]];
    while (!tags.empty()) {
      const auto semi = tags.find(';');
      const auto piece = tags.substr(0, semi);
      if (auto t = normalize_tag(piece)) {
        rec.tags.push_back(std::move(*t));
      } else if (!piece.empty()) {
        ++report.counters["dropped_tag"];
      }
      if (semi == std::string_view::npos) break;
      tags.remove_prefix(semi + 1);
    }
    seen.insert(rec.id);
    out.records.push_back(std::move(rec));
    ++report.accepted;
  });
  return out;
}

/// Parses a POI CSV with header `id,lat,lon,category`. Unknown categories map
/// to Other and bump the `unknown_category` counter.
inline ParseResult<PoiRecord> parse_pois(std::istream& in, const BoundingBox& bbox) {
  static constexpr std::array<std::string_view, 4> kColumns = {"id", "lat", "lon", "category"};
  ParseResult<PoiRecord> out;
  std::size_t width = 0;
  const auto col = detail::resolve_header(in, kColumns, width);
  std::unordered_set<std::string> seen;

  detail::for_each_record(in, width, out.report, [&](std::vector<std::string>& f) {
    IngestReport& report = out.report;
    PoiRecord rec;
    rec.id = std::move(f[col[0]]);
    if (rec.id.empty()) return report.reject("missing_id");
    auto point = detail::parse_point(f[col[1]], f[col[2]]);
    if (!point) return report.reject("bad_coordinate");
    if (!bbox_contains(bbox, *point)) return report.reject("out_of_bbox");
    if (seen.contains(rec.id)) return report.reject("duplicate_id");

    rec.point = *point;
    if (auto c = parse_category(f[col[3]])) {
      rec.category = *c;
    } else {
      rec.category = PoiCategory::Other;
      ++report.counters["unknown_category"];
    }
    seen.insert(rec.id);
    out.records.push_back(std::move(rec));
    ++report.accepted;
  });
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return in;
}

inline ParseResult<PhotoRecord> load_photos(const std::string& path, const BoundingBox& bbox,
                                            EpochSeconds now = now_epoch_seconds()) {
  auto in = open_input(path);
  return parse_photos(in, bbox, now);
}

inline ParseResult<PoiRecord> load_pois(const std::string& path, const BoundingBox& bbox) {
  auto in = open_input(path);
  return parse_pois(in, bbox);
}

}  // namespace urbent
