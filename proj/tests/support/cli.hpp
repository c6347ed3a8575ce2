#pragma once

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "json.hpp"

namespace testutil {

struct RunResult {
  int exit_code = -1;
  double wall_s = 0.0;
  long peak_rss_kb = 0;
  std::string out;  ///< captured stdout
};

/// Runs the CLI binary with `args`, stdout captured, stderr discarded.
inline RunResult run_cli(const std::vector<std::string>& args) {
  const auto out_file = std::filesystem::temp_directory_path() /
                        ("urbent_cli_stdout_" + std::to_string(::getpid()));
  std::vector<std::string> argv_s{URBENT_CLI};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  argv.push_back(nullptr);

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid == 0) {
    if (!std::freopen(out_file.c_str(), "w", stdout)) _exit(127);
    if (!std::freopen("/dev/null", "w", stderr)) _exit(127);
    ::execv(argv[0], argv.data());
    _exit(127);
  }
  RunResult r;
  int status = 0;
  rusage usage{};
  ::wait4(pid, &status, 0, &usage);
  r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.peak_rss_kb = usage.ru_maxrss;
  r.out = slurp(out_file);
  std::filesystem::remove(out_file);
  return r;
}

inline const std::vector<std::string>& output_files() {
  static const std::vector<std::string> names{"entities.geojson", "profiles.json", "summary.json", "tree.json"};
  return names;
}

inline void collect_leaves(const nlohmann::json& it, std::set<std::string>& leaves) {
  for (const auto& c : it.at("clusters")) {
    const std::string outcome = c.at("outcome");
    if (outcome == "leaf" || outcome == "leaf_max_depth" || outcome == "leaf_unsplit") {
      leaves.insert(c.at("id").get<std::string>());
    }
    if (c.contains("subrun")) collect_leaves(c.at("subrun"), leaves);
  }
}

/// Structural checks over one mine output directory. Returns a list of
/// problems; empty means the outputs are consistent.
inline std::vector<std::string> check_mine_outputs(const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  auto fail = [&](const std::string& m) { problems.push_back(m); };
  nlohmann::json geo, profiles, summary, tree;
  try {
    geo = nlohmann::json::parse(slurp(dir / "entities.geojson"));
    profiles = nlohmann::json::parse(slurp(dir / "profiles.json"));
    summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    tree = nlohmann::json::parse(slurp(dir / "tree.json"));
  } catch (const std::exception& e) {
    return {std::string("unparseable output: ") + e.what()};
  }

  if (geo.value("type", "") != "FeatureCollection") fail("not a FeatureCollection");
  const auto& bbox = summary.at("config").at("bbox");
  const double min_lat = bbox[0], min_lon = bbox[1], max_lat = bbox[2], max_lon = bbox[3];
  std::map<std::string, const nlohmann::json*> by_id;
  for (const auto& p : profiles) by_id[p.at("entity_id").get<std::string>()] = &p;
  if (by_id.size() != profiles.size()) fail("duplicate profile ids");

  std::set<std::string> feature_ids;
  for (const auto& f : geo.at("features")) {
    const std::string id = f.at("id");
    if (!feature_ids.insert(id).second) fail("duplicate feature id " + id);
    if (f.at("properties").at("id") != id) fail("feature id mismatch " + id);
    const auto& g = f.at("geometry");
    if (g.at("type") != "Polygon") fail("geometry is not a Polygon: " + id);
    const auto& ring = g.at("coordinates").at(0);
    if (ring.size() < 4) fail("ring shorter than 4 positions: " + id);
    if (ring.front() != ring.back()) fail("ring not closed: " + id);
    for (const auto& pos : ring) {
      const double lon = pos[0], lat = pos[1];
      if (lon < min_lon || lon > max_lon || lat < min_lat || lat > max_lat) {
        fail("hull vertex outside bbox: " + id);
        break;
      }
    }
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      fail("feature without profile: " + id);
      continue;
    }
    const auto& prof = *it->second;
    if (prof.at("photo_count") != f.at("properties").at("photo_count") ||
        prof.at("poi_count") != f.at("properties").at("poi_count")) {
      fail("count mismatch between feature and profile: " + id);
    }
    std::size_t dow = 0, hod = 0, cats = 0;
    for (const auto& v : prof.at("dow_hist")) dow += v.get<std::size_t>();
    for (const auto& v : prof.at("hod_hist")) hod += v.get<std::size_t>();
    for (const auto& [k, v] : prof.at("category_counts").items()) cats += v.get<std::size_t>();
    const std::size_t photos = prof.at("photo_count"), pois = prof.at("poi_count");
    if (dow != photos || hod != photos) fail("histogram sums differ from photo_count: " + id);
    if (cats != pois) fail("category sum differs from poi_count: " + id);
    for (const auto& tag : prof.at("top_tags")) {
      if (!(tag.at("score").get<double>() > 0.0)) fail("non-positive tag score: " + id);
    }
  }
  if (feature_ids.size() != by_id.size()) fail("profile without feature");

  std::set<std::string> leaves;
  collect_leaves(tree.at("root"), leaves);
  if (leaves != feature_ids) fail("tree leaves differ from features");

  const auto& fates = summary.at("point_fates");
  const std::size_t total = fates.at("total");
  const std::size_t sum = fates.at("root_noise").get<std::size_t>() + fates.at("subrun_noise").get<std::size_t>() +
                          fates.at("discarded_small").get<std::size_t>() + fates.at("in_entities").get<std::size_t>();
  if (total != sum) fail("point fates do not balance");
  std::size_t member_total = 0;
  for (const auto& p : profiles) {
    member_total += p.at("photo_count").get<std::size_t>() + p.at("poi_count").get<std::size_t>();
  }
  if (member_total != fates.at("in_entities").get<std::size_t>()) fail("entity members differ from in_entities");
  return problems;
}

}  // namespace testutil
