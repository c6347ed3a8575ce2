// urbent: city entity mining from geo-tagged photo and POI records.
//
//   urbent mine     --photos F --pois F --bbox minLat,minLon,maxLat,maxLon --out DIR ...
//   urbent synth    --spec F --seed N --out DIR
//   urbent validate --photos F --pois F --bbox ...
//
// Exit codes: 0 ok, 1 validate found rejected lines, 2 configuration error,
// 3 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "urbent/urbent.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_logger_mt("urbent");
  logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("URBENT_LOG")) {
    auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour recognised ones.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

/// Writes every file under a temporary name, then renames them into place.
/// On failure, temporaries are removed and nothing new is left in `dir`.
void write_atomically(const fs::path& dir, const std::map<std::string, std::string>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  const std::string suffix = ".tmp." + std::to_string(::getpid());
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    for (const auto& [tmp, final_path] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [name, contents] : files) {
    const fs::path final_path = dir / name;
    const fs::path tmp = dir / ("." + name + suffix);
    staged.emplace_back(tmp, final_path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) {
      cleanup();
      throw IoError("cannot write '" + tmp.string() + "'");
    }
  }
  for (const auto& [tmp, final_path] : staged) {
    fs::rename(tmp, final_path, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot rename into '" + final_path.string() + "': " + ec.message());
    }
  }
}

struct MineFlags {
  std::string config_path;
  std::string photos, pois, bbox, out, min_pts_policy;
  double eps = 0, eps_shrink = 0, max_fraction = 0, max_radius = 0;
  std::size_t min_pts = 0, max_depth = 0, min_cluster_size = 0, min_pts_floor = 0, top_k = 0, sample_cap = 0;
  int tz_offset = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> stoplists;
  bool timings = false;
};

int run_mine(const MineFlags& f, const CLI::App& cmd) {
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  urbent::RunConfig cfg;
  try {
    if (given("--config")) {
      std::ifstream in(f.config_path);
      if (!in) throw urbent::ConfigError("cannot read config '" + f.config_path + "'");
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw urbent::ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      cfg = urbent::config_from_json(j);
    }
    if (given("--photos")) cfg.photos_path = f.photos;
    if (given("--pois")) cfg.pois_path = f.pois;
    if (given("--bbox")) cfg.bbox = urbent::parse_bbox(f.bbox);
    if (given("--eps")) cfg.params.eps = f.eps;
    if (given("--min-pts")) cfg.params.min_pts = f.min_pts;
    if (given("--eps-shrink")) cfg.policy.eps_shrink = f.eps_shrink;
    if (given("--max-fraction")) cfg.policy.max_fraction = f.max_fraction;
    if (given("--max-radius")) cfg.policy.max_radius = f.max_radius;
    if (given("--max-depth")) cfg.policy.max_depth = f.max_depth;
    if (given("--min-cluster-size")) cfg.policy.min_cluster_size = f.min_cluster_size;
    if (given("--min-pts-policy")) cfg.policy.min_pts_policy = urbent::parse_min_pts_policy(f.min_pts_policy);
    if (given("--min-pts-floor")) cfg.policy.min_pts_floor = f.min_pts_floor;
    if (given("--top-k")) cfg.top_k = f.top_k;
    if (given("--tz-offset-minutes")) cfg.tz_offset_minutes = f.tz_offset;
    if (given("--stoplist")) cfg.stoplist_paths = f.stoplists;
    if (given("--sample-cap")) cfg.sample_cap = f.sample_cap;
    if (given("--seed")) cfg.seed = f.seed;
    urbent::validate(cfg);
  } catch (const urbent::ConfigError& e) {
    spdlog::error("{}", e.what());
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    urbent::Stopwatch watch;
    urbent::StageTimings timings;
    const auto data = urbent::load_inputs(cfg);
    timings.emplace_back("ingest", watch.lap());
    spdlog::info("ingested {} photos, {} POIs", data.dataset.photos.size(), data.dataset.pois.size());

    const auto result = urbent::mine(cfg, data, timings, f.timings);
    for (const auto& [stage, secs] : timings) spdlog::info("stage {}: {:.3f} s", stage, secs);
    spdlog::info("{} entities from {} iterations", result.refine.entities.size(), result.refine.iterations);

    write_atomically(f.out, result.files);
  } catch (const urbent::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const urbent::IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int run_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out_dir) {
  urbent::Dataset ds;
  try {
    std::ifstream in(spec_path);
    if (!in) throw urbent::SpecError("cannot read spec '" + spec_path + "'");
    const auto spec = urbent::parse_synthetic_spec(in);
    ds = urbent::generate_synthetic(spec, seed);
  } catch (const urbent::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::ostringstream photos, pois, truth;
  urbent::write_photos_csv(photos, ds.photos);
  urbent::write_pois_csv(pois, ds.pois);
  urbent::write_ground_truth_csv(truth, ds);
  try {
    write_atomically(out_dir, {{"photos.csv", photos.str()},
                               {"pois.csv", pois.str()},
                               {"ground_truth.csv", truth.str()}});
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  spdlog::info("wrote {} photos, {} POIs to {}", ds.photos.size(), ds.pois.size(), out_dir);
  return kExitOk;
}

int run_validate(const std::string& photos, const std::string& pois, const std::string& bbox_text) {
  urbent::BoundingBox bbox;
  try {
    bbox = urbent::parse_bbox(bbox_text);
  } catch (const urbent::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  urbent::ordered_json report;
  std::size_t rejected = 0;
  try {
    if (!photos.empty()) {
      auto r = urbent::load_photos(photos, bbox);
      rejected += r.report.rejected;
      report["photos"] = urbent::to_json(r.report);
    }
    if (!pois.empty()) {
      auto r = urbent::load_pois(pois, bbox);
      rejected += r.report.rejected;
      report["pois"] = urbent::to_json(r.report);
    }
  } catch (const urbent::IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  std::cout << report.dump(2) << "\n";
  return rejected == 0 ? kExitOk : kExitRejected;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"urbent: discover and characterize city entities from geo-tagged records"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(urbent::kVersion));

  MineFlags mf;
  urbent::RunConfig defaults;
  auto* mine = app.add_subcommand("mine", "Cluster records into entities and write reports");
  mine->add_option("--config", mf.config_path, "JSON config (or a previous summary.json) to start from");
  mine->add_option("--photos", mf.photos, "Photo CSV (id,lat,lon,taken_at,user_id,tags)");
  mine->add_option("--pois", mf.pois, "POI CSV (id,lat,lon,category)");
  mine->add_option("--bbox", mf.bbox, "minLat,minLon,maxLat,maxLon");
  mine->add_option("--eps", mf.eps, "DBSCAN radius in meters")->default_val(defaults.params.eps);
  mine->add_option("--min-pts", mf.min_pts, "DBSCAN density threshold (self included)")
      ->default_val(defaults.params.min_pts);
  mine->add_option("--eps-shrink", mf.eps_shrink, "eps multiplier per refinement level")
      ->default_val(defaults.policy.eps_shrink);
  mine->add_option("--max-fraction", mf.max_fraction, "max share of clustered points per entity")
      ->default_val(defaults.policy.max_fraction);
  mine->add_option("--max-radius", mf.max_radius, "max entity radius in meters")
      ->default_val(defaults.policy.max_radius);
  mine->add_option("--max-depth", mf.max_depth, "refinement depth limit")->default_val(defaults.policy.max_depth);
  mine->add_option("--min-cluster-size", mf.min_cluster_size, "smallest reported entity")
      ->default_val(defaults.policy.min_cluster_size);
  mine->add_option("--min-pts-policy", mf.min_pts_policy, "keep | scale")->default_val("keep");
  mine->add_option("--min-pts-floor", mf.min_pts_floor, "lower bound on min_pts under 'scale'")
      ->default_val(defaults.policy.min_pts_floor);
  mine->add_option("--top-k", mf.top_k, "tags per entity profile")->default_val(defaults.top_k);
  mine->add_option("--tz-offset-minutes", mf.tz_offset, "report timezone offset from UTC")
      ->default_val(defaults.tz_offset_minutes);
  mine->add_option("--stoplist", mf.stoplists, "extra stop-list file (repeatable)");
  mine->add_option("--sample-cap", mf.sample_cap, "silhouette sample size cap")->default_val(defaults.sample_cap);
  mine->add_option("--seed", mf.seed, "seed for silhouette sampling")->default_val(defaults.seed);
  mine->add_option("--out", mf.out, "output directory")->required();
  mine->add_flag("--timings", mf.timings, "include wall-clock stage times in summary.json");

  std::string spec_path, synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  synth->add_option("--spec", spec_path, "synthetic spec file")->required();
  synth->add_option("--seed", synth_seed, "random seed")->required();
  synth->add_option("--out", synth_out, "output directory")->required();

  std::string v_photos, v_pois, v_bbox;
  auto* validate = app.add_subcommand("validate", "Run ingest only and print the report as JSON");
  validate->add_option("--photos", v_photos, "photo CSV");
  validate->add_option("--pois", v_pois, "POI CSV");
  validate->add_option("--bbox", v_bbox, "minLat,minLon,maxLat,maxLon")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*mine) return run_mine(mf, *mine);
  if (*synth) return run_synth(spec_path, synth_seed, synth_out);
  if (*validate) {
    if (v_photos.empty() && v_pois.empty()) {
      std::cerr << "error: validate needs --photos and/or --pois\n";
      return kExitConfig;
    }
    return run_validate(v_photos, v_pois, v_bbox);
  }
  return kExitConfig;
}
