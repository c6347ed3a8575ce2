#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "urbent/characterize.hpp"
#include "urbent/ingest.hpp"
#include "urbent/refine.hpp"
#include "urbent/report.hpp"

namespace urbent {

inline constexpr std::string_view kVersion = "1.0.0";

/// Invalid run configuration (bad values, unreadable input paths).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::optional<std::string> photos_path;
  std::optional<std::string> pois_path;
  std::optional<BoundingBox> bbox;
  Params params;
  RefinePolicy policy;
  int tz_offset_minutes = kDefaultTzOffsetMinutes;
  std::vector<std::string> stoplist_paths;
  std::size_t top_k = kDefaultTopK;
  std::size_t sample_cap = kDefaultSilhouetteSampleCap;
  std::uint64_t seed = 0;
};

inline void validate(const RunConfig& cfg) {
  if (!cfg.photos_path && !cfg.pois_path) throw ConfigError("at least one of --photos/--pois is required");
  if (!cfg.bbox) throw ConfigError("--bbox is required");
  if (!is_valid(*cfg.bbox)) throw ConfigError("invalid bbox");
  if (cfg.top_k == 0) throw ConfigError("top_k must be positive");
  if (cfg.sample_cap == 0) throw ConfigError("sample_cap must be positive");
  if (cfg.tz_offset_minutes < -14 * 60 || cfg.tz_offset_minutes > 14 * 60) {
    throw ConfigError("tz offset out of range");
  }
  try {
    validate(cfg.policy, cfg.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto readable = [](const std::string& path) { return static_cast<bool>(std::ifstream(path)); };
  for (const auto* p : {&cfg.photos_path, &cfg.pois_path}) {
    if (*p && !readable(**p)) throw ConfigError("cannot read '" + **p + "'");
  }
  for (const auto& p : cfg.stoplist_paths) {
    if (!readable(p)) throw ConfigError("cannot read stop list '" + p + "'");
  }
}

/// Parses `minLat,minLon,maxLat,maxLon`.
inline BoundingBox parse_bbox(const std::string& text) {
  std::vector<double> v;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    double x = 0.0;
    if (!detail::parse_double(rest.substr(0, comma), x)) throw ConfigError("bad bbox '" + text + "'");
    v.push_back(x);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (v.size() != 4) throw ConfigError("bbox needs minLat,minLon,maxLat,maxLon");
  BoundingBox b{v[0], v[2], v[1], v[3]};
  if (!is_valid(b)) throw ConfigError("invalid bbox '" + text + "'");
  return b;
}

inline std::string_view policy_name(MinPtsPolicy p) { return p == MinPtsPolicy::keep ? "keep" : "scale"; }

inline MinPtsPolicy parse_min_pts_policy(const std::string& s) {
  if (s == "keep") return MinPtsPolicy::keep;
  if (s == "scale") return MinPtsPolicy::scale;
  throw ConfigError("min_pts_policy must be keep or scale");
}

/// Effective configuration in the form accepted back by config_from_json().
/// The output directory is not part of it.
inline ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["photos"] = c.photos_path ? ordered_json(*c.photos_path) : ordered_json(nullptr);
  j["pois"] = c.pois_path ? ordered_json(*c.pois_path) : ordered_json(nullptr);
  if (c.bbox) {
    j["bbox"] = {c.bbox->min_lat, c.bbox->min_lon, c.bbox->max_lat, c.bbox->max_lon};
  }
  j["eps"] = c.params.eps;
  j["min_pts"] = c.params.min_pts;
  j["eps_shrink"] = c.policy.eps_shrink;
  j["max_fraction"] = c.policy.max_fraction;
  j["max_radius"] = c.policy.max_radius;
  j["max_depth"] = c.policy.max_depth;
  j["min_cluster_size"] = c.policy.min_cluster_size;
  j["min_pts_policy"] = policy_name(c.policy.min_pts_policy);
  j["min_pts_floor"] = c.policy.min_pts_floor;
  j["top_k"] = c.top_k;
  j["tz_offset_minutes"] = c.tz_offset_minutes;
  j["stoplists"] = c.stoplist_paths;
  j["sample_cap"] = c.sample_cap;
  j["seed"] = c.seed;
  return j;
}

/// Reads a config object, or the `config` member of a summary.json.
inline RunConfig config_from_json(const nlohmann::json& in) {
  const nlohmann::json& j = in.contains("config") ? in.at("config") : in;
  RunConfig c;
  try {
    if (j.contains("photos") && !j["photos"].is_null()) c.photos_path = j["photos"].get<std::string>();
    if (j.contains("pois") && !j["pois"].is_null()) c.pois_path = j["pois"].get<std::string>();
    if (j.contains("bbox")) {
      auto b = j["bbox"].get<std::vector<double>>();
      if (b.size() != 4) throw ConfigError("bbox needs 4 numbers");
      c.bbox = BoundingBox{b[0], b[2], b[1], b[3]};
    }
    c.params.eps = j.value("eps", c.params.eps);
    c.params.min_pts = j.value("min_pts", c.params.min_pts);
    c.policy.eps_shrink = j.value("eps_shrink", c.policy.eps_shrink);
    c.policy.max_fraction = j.value("max_fraction", c.policy.max_fraction);
    c.policy.max_radius = j.value("max_radius", c.policy.max_radius);
    c.policy.max_depth = j.value("max_depth", c.policy.max_depth);
    c.policy.min_cluster_size = j.value("min_cluster_size", c.policy.min_cluster_size);
    c.policy.min_pts_policy = parse_min_pts_policy(j.value("min_pts_policy", std::string("keep")));
    c.policy.min_pts_floor = j.value("min_pts_floor", c.policy.min_pts_floor);
    c.top_k = j.value("top_k", c.top_k);
    c.tz_offset_minutes = j.value("tz_offset_minutes", c.tz_offset_minutes);
    c.stoplist_paths = j.value("stoplists", c.stoplist_paths);
    c.sample_cap = j.value("sample_cap", c.sample_cap);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

struct LoadedData {
  Dataset dataset;
  std::optional<IngestReport> photo_report;
  std::optional<IngestReport> poi_report;
};

inline LoadedData load_inputs(const RunConfig& cfg) {
  LoadedData out;
  out.dataset.bbox = *cfg.bbox;
  if (cfg.photos_path) {
    auto r = load_photos(*cfg.photos_path, *cfg.bbox);
    out.dataset.photos = std::move(r.records);
    out.photo_report = std::move(r.report);
  }
  if (cfg.pois_path) {
    auto r = load_pois(*cfg.pois_path, *cfg.bbox);
    out.dataset.pois = std::move(r.records);
    out.poi_report = std::move(r.report);
  }
  return out;
}

using StageTimings = std::vector<std::pair<std::string, double>>;

struct MineResult {
  RefineResult refine;
  std::vector<EntityProfile> profiles;
  /// File name -> contents, for entities.geojson, profiles.json, tree.json, summary.json.
  std::map<std::string, std::string> files;
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

/// Clustering, characterization and serialization of already-loaded data.
/// When `timings_in_summary` is set, wall-clock stage times are written into
/// summary.json (which then stops being byte-reproducible).
inline MineResult mine(const RunConfig& cfg, const LoadedData& data, StageTimings& timings,
                       bool timings_in_summary = false) {
  const Dataset& ds = data.dataset;
  if (ds.photos.empty() && ds.pois.empty()) throw ConfigError("no records accepted from the inputs");

  Stopwatch watch;
  MineResult out;
  try {
    out.refine = iterative_cluster(ds, cfg.params, cfg.policy, {cfg.sample_cap, cfg.seed});
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("bbox too large for planar projection: ") + e.what());
  }
  timings.emplace_back("cluster", watch.lap());

  ProfileOptions opt;
  opt.top_k = cfg.top_k;
  opt.tz_offset_minutes = cfg.tz_offset_minutes;
  for (const auto& path : cfg.stoplist_paths) load_stoplist_file(path, opt.stoplists);
  out.profiles = profile_entities(out.refine.entities, ds, opt);
  timings.emplace_back("characterize", watch.lap());

  ordered_json profiles = ordered_json::array();
  for (const auto& p : out.profiles) profiles.push_back(to_json(p, cfg.tz_offset_minutes));

  ordered_json iterations = ordered_json::array();
  auto walk = [&](auto&& self, const IterationRecord& it) -> void {
    iterations.push_back({{"parent_id", it.parent_id},
                          {"depth", it.depth},
                          {"params", to_json(it.params)},
                          {"input_points", it.input_points},
                          {"cluster_count", it.cluster_count},
                          {"noise_count", it.noise_count},
                          {"silhouette", optional_number(it.silhouette)},
                          {"silhouette_sampled", it.silhouette_sampled},
                          {"silhouette_sample_size", it.silhouette_sample_size}});
    for (const auto& c : it.clusters) {
      for (const auto& sub : c.subrun) self(self, sub);
    }
  };
  walk(walk, out.refine.tree.root);

  ordered_json summary;
  summary["tool"] = "urbent";
  summary["version"] = kVersion;
  summary["config"] = to_json(cfg);
  ordered_json counts;
  counts["photos"] = data.photo_report ? to_json(*data.photo_report) : ordered_json(nullptr);
  counts["pois"] = data.poi_report ? to_json(*data.poi_report) : ordered_json(nullptr);
  counts["points"] = out.refine.pool.size();
  counts["entities"] = out.refine.entities.size();
  counts["iterations"] = out.refine.iterations;
  summary["counts"] = std::move(counts);
  summary["point_fates"] = to_json(out.refine.fates);
  summary["projection_origin"] = {out.refine.pool.origin.lat, out.refine.pool.origin.lon};
  summary["iterations"] = std::move(iterations);

  out.files["entities.geojson"] = entities_geojson(out.refine.entities, out.profiles).dump(1) + "\n";
  out.files["profiles.json"] = profiles.dump(1) + "\n";
  out.files["tree.json"] = to_json(out.refine.tree).dump(1) + "\n";
  timings.emplace_back("serialize", watch.lap());
  if (timings_in_summary) {
    ordered_json t = ordered_json::object();
    for (const auto& [stage, secs] : timings) t[stage] = secs;
    summary["timings_s"] = std::move(t);
  }
  out.files["summary.json"] = summary.dump(1) + "\n";
  return out;
}

}  // namespace urbent
