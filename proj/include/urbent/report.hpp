#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "urbent/characterize.hpp"
#include "urbent/ingest.hpp"
#include "urbent/refine.hpp"

namespace urbent {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const Params& p) {
  return {{"eps", p.eps}, {"min_pts", p.min_pts}};
}

inline ordered_json to_json(const BoundingBox& b) {
  return {{"min_lat", b.min_lat}, {"min_lon", b.min_lon}, {"max_lat", b.max_lat}, {"max_lon", b.max_lon}};
}

inline ordered_json to_json(const IngestReport& r) {
  ordered_json reasons = ordered_json::object();
  for (const auto& [k, v] : r.reasons) reasons[k] = v;
  ordered_json counters = ordered_json::object();
  for (const auto& [k, v] : r.counters) counters[k] = v;
  return {{"accepted", r.accepted}, {"rejected", r.rejected}, {"reasons", reasons}, {"counters", counters}};
}

inline ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

inline ordered_json to_json(const IterationRecord& it) {
  ordered_json j;
  j["parent_id"] = it.parent_id;
  j["depth"] = it.depth;
  j["params"] = to_json(it.params);
  j["input_points"] = it.input_points;
  j["cluster_count"] = it.cluster_count;
  j["noise_count"] = it.noise_count;
  j["silhouette"] = optional_number(it.silhouette);
  j["silhouette_sampled"] = it.silhouette_sampled;
  j["silhouette_sample_size"] = it.silhouette_sample_size;
  ordered_json clusters = ordered_json::array();
  for (const auto& c : it.clusters) {
    ordered_json cj;
    cj["id"] = c.id;
    cj["size"] = c.size;
    cj["photo_count"] = c.photo_count;
    cj["poi_count"] = c.poi_count;
    cj["radius_m"] = c.radius_m;
    cj["fraction"] = c.fraction;
    cj["satisfactory"] = c.satisfactory;
    cj["outcome"] = outcome_name(c.outcome);
    if (!c.subrun.empty()) cj["subrun"] = to_json(c.subrun.front());
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  return j;
}

inline ordered_json to_json(const EntityTree& tree) {
  return {{"root", to_json(tree.root)}};
}

inline ordered_json to_json(const PointFates& f) {
  return {{"total", f.total},
          {"root_noise", f.root_noise},
          {"subrun_noise", f.subrun_noise},
          {"discarded_small", f.discarded_small},
          {"in_entities", f.in_entities}};
}

inline ordered_json to_json(const EntityProfile& p, int tz_offset_minutes) {
  ordered_json j;
  j["entity_id"] = p.entity_id;
  j["photo_count"] = p.photo_count;
  j["poi_count"] = p.poi_count;
  j["tz_offset_minutes"] = tz_offset_minutes;
  j["dow_hist"] = p.dow_hist;
  j["hod_hist"] = p.hod_hist;
  ordered_json tags = ordered_json::array();
  for (const auto& t : p.top_tags) tags.push_back({{"tag", t.tag}, {"score", t.score}});
  j["top_tags"] = std::move(tags);
  ordered_json cats = ordered_json::object();
  for (std::size_t i = 0; i < kPoiCategoryCount; ++i) {
    cats[std::string(kPoiCategoryNames[i])] = p.category_counts[i];
  }
  j["category_counts"] = std::move(cats);
  ordered_json series = ordered_json::object();
  for (const auto& t : p.top_tags) {
    ordered_json years = ordered_json::object();
    for (const auto& [year, count] : p.tag_timeseries.at(t.tag)) years[std::to_string(year)] = count;
    series[t.tag] = std::move(years);
  }
  j["tag_timeseries"] = std::move(series);
  return j;
}

/// GeoJSON ring for a closed hull. Degenerate hulls (one or two distinct
/// vertices) repeat their last vertex so the ring has the four positions
/// GeoJSON requires.
inline ordered_json hull_ring(const std::vector<GeoPoint>& closed_hull) {
  std::vector<GeoPoint> open(closed_hull.begin(), closed_hull.end() - 1);
  while (open.size() < 3) open.push_back(open.back());
  ordered_json ring = ordered_json::array();
  for (const auto& g : open) ring.push_back({g.lon, g.lat});
  ring.push_back({open.front().lon, open.front().lat});
  return ring;
}

/// FeatureCollection with one polygon per entity, in profile (id) order.
inline ordered_json entities_geojson(const std::vector<Entity>& entities,
                                     const std::vector<EntityProfile>& profiles) {
  std::map<std::string, const Entity*> by_id;
  for (const auto& e : entities) by_id[e.id] = &e;
  ordered_json features = ordered_json::array();
  for (const auto& p : profiles) {
    const Entity& e = *by_id.at(p.entity_id);
    ordered_json top = ordered_json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(3, p.top_tags.size()); ++i) top.push_back(p.top_tags[i].tag);
    ordered_json props;
    props["id"] = e.id;
    props["depth"] = e.depth;
    props["photo_count"] = e.photo_indices.size();
    props["poi_count"] = e.poi_indices.size();
    props["params_used"] = to_json(e.params_used);
    props["top_tags"] = std::move(top);
    props["centroid"] = {e.centroid.lon, e.centroid.lat};
    props["radius_m"] = e.radius_m;
    props["silhouette_context"] = optional_number(e.silhouette_context);
    props["outcome"] = outcome_name(e.outcome);
    ordered_json feature;
    feature["type"] = "Feature";
    feature["id"] = e.id;
    feature["geometry"] = {{"type", "Polygon"}, {"coordinates", ordered_json::array({hull_ring(e.hull)})}};
    feature["properties"] = std::move(props);
    features.push_back(std::move(feature));
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace urbent
