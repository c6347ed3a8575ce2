#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "urbent/csv.hpp"
#include "urbent/geo.hpp"
#include "urbent/ingest.hpp"
#include "urbent/timeutil.hpp"

namespace urbent {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Platform-stable random source: mt19937_64 bits with hand-rolled
/// uniform/normal transforms (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = 0;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

  template <typename T>
  std::size_t weighted_pick(const std::vector<std::pair<T, double>>& items) {
    double total = 0.0;
    for (const auto& it : items) total += it.second;
    double x = uniform() * total;
    for (std::size_t i = 0; i < items.size(); ++i) {
      x -= items[i].second;
      if (x < 0.0) return i;
    }
    return items.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// splitmix64 finalizer; derives independent sub-seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using WeightedTags = std::vector<std::pair<std::string, double>>;
using WeightedCategories = std::vector<std::pair<PoiCategory, double>>;

struct BlobSpec {
  std::optional<GeoPoint> center;  ///< random placement when absent
  double sigma_m = 50.0;           ///< isotropic standard deviation
  std::size_t photos = 100;
  std::size_t pois = 0;
  WeightedTags tags;  ///< defaults to a blob-specific vocabulary when empty
  WeightedCategories categories;
  std::optional<std::size_t> parent;  ///< index of the enclosing blob
};

struct SyntheticSpec {
  BoundingBox bbox{45.40, 45.55, 9.05, 9.30};
  double noise_fraction = 0.0;  ///< share of the final record count that is uniform noise
  double separation_sigmas = 10.0;
  EpochSeconds time_start = 1262304000;  // 2010-01-01
  EpochSeconds time_end = 1451606400;    // 2016-01-01
  std::size_t min_tags = 1;
  std::size_t max_tags = 4;
  WeightedTags common_tags{{"milano", 1.0}};
  double common_tag_rate = 0.5;  ///< probability a photo carries a common tag
  double domain_tag_rate = 0.2;  ///< probability a photo carries platform tags
  std::vector<BlobSpec> blobs;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = s.find(sep);
    parts.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return parts;
}

inline double spec_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!parse_double(v, out) || !std::isfinite(out)) {
    throw SpecError("'" + std::string(key) + "': not a number: " + std::string(v));
  }
  return out;
}

inline std::size_t spec_count(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw SpecError("'" + std::string(key) + "': not an integer: " + std::string(v));
  }
  if (out < 0) throw SpecError("'" + std::string(key) + "' must not be negative");
  return static_cast<std::size_t>(out);
}

inline std::vector<std::pair<std::string, double>> spec_weights(std::string_view key,
                                                                std::string_view v) {
  std::vector<std::pair<std::string, double>> out;
  if (v.empty()) return out;
  for (auto item : split(v, ',')) {
    const auto colon = item.rfind(':');
    std::string name(trim(item.substr(0, colon)));
    double w = 1.0;
    if (colon != std::string_view::npos) w = spec_double(key, trim(item.substr(colon + 1)));
    if (name.empty() || !(w > 0.0)) {
      throw SpecError("'" + std::string(key) + "': bad weighted item: " + std::string(item));
    }
    out.emplace_back(std::move(name), w);
  }
  return out;
}

}  // namespace detail

/// Reads the key-value synthetic spec format:
///
///   # global keys
///   bbox = minLat,minLon,maxLat,maxLon
///   noise_fraction = 0.1
///   clusters = 3          # shorthand: k auto-placed blobs sharing the
///   photos = 3000         # photo/poi totals (noise included)
///   pois = 300
///   sigma_m = 50
///   [blob]                # or explicit blobs, one section each
///   center = 45.46,9.19
///   sigma_m = 40
///   photos = 500
///   parent = 3
///
/// See README for the full key list.
inline SyntheticSpec parse_synthetic_spec(std::istream& in) {
  SyntheticSpec spec;
  std::optional<std::size_t> clusters;
  std::size_t total_photos = 0;
  std::size_t total_pois = 0;
  double auto_sigma = 50.0;
  WeightedCategories auto_categories;
  bool in_blob = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line == "[blob]") {
      spec.blobs.emplace_back();
      in_blob = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw SpecError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));

    auto categories_of = [&](std::string_view v) {
      WeightedCategories out;
      for (auto& [name, w] : detail::spec_weights(key, v)) {
        auto c = parse_category(name);
        if (!c) throw SpecError("unknown POI category '" + name + "'");
        out.emplace_back(*c, w);
      }
      return out;
    };

    if (in_blob) {
      BlobSpec& b = spec.blobs.back();
      if (key == "center") {
        auto parts = detail::split(value, ',');
        if (parts.size() != 2) throw SpecError("center: expected lat,lon");
        b.center = GeoPoint{detail::spec_double(key, parts[0]), detail::spec_double(key, parts[1])};
      } else if (key == "sigma_m") {
        b.sigma_m = detail::spec_double(key, value);
      } else if (key == "photos") {
        b.photos = detail::spec_count(key, value);
      } else if (key == "pois") {
        b.pois = detail::spec_count(key, value);
      } else if (key == "tags") {
        b.tags = detail::spec_weights(key, value);
      } else if (key == "categories") {
        b.categories = categories_of(value);
      } else if (key == "parent") {
        b.parent = detail::spec_count(key, value);
      } else {
        throw SpecError("unknown blob key '" + std::string(key) + "'");
      }
      continue;
    }

    if (key == "bbox") {
      auto parts = detail::split(value, ',');
      if (parts.size() != 4) throw SpecError("bbox: expected minLat,minLon,maxLat,maxLon");
      spec.bbox = {detail::spec_double(key, parts[0]), detail::spec_double(key, parts[2]),
                   detail::spec_double(key, parts[1]), detail::spec_double(key, parts[3])};
    } else if (key == "noise_fraction") {
      spec.noise_fraction = detail::spec_double(key, value);
    } else if (key == "separation_sigmas") {
      spec.separation_sigmas = detail::spec_double(key, value);
    } else if (key == "time_start" || key == "time_end") {
      auto t = parse_iso8601_utc(value);
      if (!t) throw SpecError(std::string(key) + ": expected YYYY-MM-DDTHH:MM:SSZ");
      (key == "time_start" ? spec.time_start : spec.time_end) = *t;
    } else if (key == "min_tags") {
      spec.min_tags = detail::spec_count(key, value);
    } else if (key == "max_tags") {
      spec.max_tags = detail::spec_count(key, value);
    } else if (key == "common_tags") {
      spec.common_tags = detail::spec_weights(key, value);
    } else if (key == "common_tag_rate") {
      spec.common_tag_rate = detail::spec_double(key, value);
    } else if (key == "domain_tag_rate") {
      spec.domain_tag_rate = detail::spec_double(key, value);
    } else if (key == "clusters") {
      clusters = detail::spec_count(key, value);
    } else if (key == "photos") {
      total_photos = detail::spec_count(key, value);
    } else if (key == "pois") {
      total_pois = detail::spec_count(key, value);
    } else if (key == "sigma_m") {
      auto_sigma = detail::spec_double(key, value);
    } else if (key == "categories") {
      auto_categories = categories_of(value);
    } else {
      throw SpecError("unknown key '" + std::string(key) + "'");
    }
  }

  if (clusters) {
    if (!spec.blobs.empty()) throw SpecError("'clusters' cannot be combined with [blob] sections");
    const std::size_t k = *clusters;
    if (k == 0) throw SpecError("clusters must be positive");
    if (!(spec.noise_fraction >= 0.0 && spec.noise_fraction < 1.0)) {
      throw SpecError("noise_fraction must lie in [0, 1)");
    }
    const auto noise_photos = static_cast<std::size_t>(
        std::llround(spec.noise_fraction * static_cast<double>(total_photos)));
    const auto noise_pois = static_cast<std::size_t>(
        std::llround(spec.noise_fraction * static_cast<double>(total_pois)));
    const std::size_t blob_photos = total_photos - noise_photos;
    const std::size_t blob_pois = total_pois - noise_pois;
    for (std::size_t i = 0; i < k; ++i) {
      BlobSpec b;
      b.sigma_m = auto_sigma;
      b.photos = blob_photos / k + (i < blob_photos % k ? 1 : 0);
      b.pois = blob_pois / k + (i < blob_pois % k ? 1 : 0);
      b.categories = auto_categories;
      spec.blobs.push_back(std::move(b));
    }
  }
  return spec;
}

namespace detail {

inline std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.7f", v);
  return buf;
}

/// Rounds to the 7-decimal text form used in CSV output so in-memory and
/// serialized datasets agree exactly.
inline double snap_coord(double v) {
  double out = 0.0;
  parse_double(format_coord(v), out);
  return out;
}

inline std::string padded_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, i);
  return buf;
}

inline void validate(const SyntheticSpec& spec) {
  if (!is_valid(spec.bbox)) throw SpecError("invalid bbox");
  if (spec.blobs.empty()) throw SpecError("spec declares no blobs");
  if (!(spec.noise_fraction >= 0.0 && spec.noise_fraction < 1.0)) {
    throw SpecError("noise_fraction must lie in [0, 1)");
  }
  if (!(spec.separation_sigmas >= 0.0)) throw SpecError("separation_sigmas must be >= 0");
  if (spec.time_end <= spec.time_start) throw SpecError("time_end must follow time_start");
  if (spec.time_start < kMinPhotoTimestamp) throw SpecError("time_start precedes 1990");
  if (spec.min_tags > spec.max_tags) throw SpecError("min_tags exceeds max_tags");
  for (std::size_t i = 0; i < spec.blobs.size(); ++i) {
    const auto& b = spec.blobs[i];
    const std::string name = "blob " + std::to_string(i);
    if (b.photos == 0) throw SpecError(name + ": photo count must be positive");
    if (!(b.sigma_m > 0.0) || !std::isfinite(b.sigma_m)) {
      throw SpecError(name + ": sigma_m must be positive");
    }
    if (b.parent) {
      if (*b.parent >= spec.blobs.size() || *b.parent == i) {
        throw SpecError(name + ": invalid parent index");
      }
      if (spec.blobs[*b.parent].parent) throw SpecError(name + ": nesting deeper than one level");
    }
    if (b.center && !bbox_contains(spec.bbox, *b.center)) {
      throw SpecError(name + ": center outside bbox");
    }
  }
}

}  // namespace detail

/// Generates a dataset from `spec`, bit-deterministic for a fixed (spec, seed).
/// Ground truth maps every record id to its blob index, or kNoiseLabel.
/// Nested blobs label their own points; a parent keeps only its own points.
inline Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  detail::validate(spec);
  Rng rng(mix_seed(seed));

  const GeoPoint origin{0.5 * (spec.bbox.min_lat + spec.bbox.max_lat),
                        0.5 * (spec.bbox.min_lon + spec.bbox.max_lon)};
  const PlanarPoint lo = project({spec.bbox.min_lat, spec.bbox.min_lon}, origin);
  const PlanarPoint hi = project({spec.bbox.max_lat, spec.bbox.max_lon}, origin);

  // Place centers: roots first, then nested blobs, declaration order within each.
  const std::size_t k = spec.blobs.size();
  std::vector<std::optional<PlanarPoint>> centers(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (spec.blobs[i].center) centers[i] = project(*spec.blobs[i].center, origin);
  }
  auto siblings = [&](std::size_t a, std::size_t b) {
    return spec.blobs[a].parent == spec.blobs[b].parent;
  };
  auto separated = [&](std::size_t i, const PlanarPoint& c) {
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i || !centers[j] || !siblings(i, j)) continue;
      const double need =
          spec.separation_sigmas * std::max(spec.blobs[i].sigma_m, spec.blobs[j].sigma_m);
      if (distance(c, *centers[j]) < need) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < k; ++i) {
    if (centers[i] && !separated(i, *centers[i])) {
      throw SpecError("blob " + std::to_string(i) + ": center violates separation");
    }
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto& b = spec.blobs[i];
      if (centers[i] || b.parent.has_value() != (pass == 1)) continue;
      constexpr int kAttempts = 100000;
      int attempt = 0;
      for (; attempt < kAttempts; ++attempt) {
        PlanarPoint c;
        if (b.parent) {
          const PlanarPoint pc = *centers[*b.parent];
          const double r = spec.blobs[*b.parent].sigma_m * std::sqrt(rng.uniform());
          const double a = 2.0 * std::numbers::pi * rng.uniform();
          c = {pc.x + r * std::cos(a), pc.y + r * std::sin(a)};
        } else {
          const double margin = 3.0 * b.sigma_m;
          if (hi.x - lo.x <= 2 * margin || hi.y - lo.y <= 2 * margin) {
            throw SpecError("bbox too small for blob " + std::to_string(i));
          }
          c = {rng.uniform(lo.x + margin, hi.x - margin), rng.uniform(lo.y + margin, hi.y - margin)};
        }
        if (bbox_contains(spec.bbox, unproject(c, origin)) && separated(i, c)) {
          centers[i] = c;
          break;
        }
      }
      if (attempt == kAttempts) {
        throw SpecError("cannot place blob " + std::to_string(i) + " with required separation");
      }
    }
  }

  auto sample_in_bbox = [&](auto&& draw) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      GeoPoint g = unproject(draw(), origin);
      g = {detail::snap_coord(g.lat), detail::snap_coord(g.lon)};
      if (bbox_contains(spec.bbox, g)) return g;
    }
    throw SpecError("blob mass falls outside bbox");
  };
  auto uniform_point = [&] {
    return sample_in_bbox([&] {
      return PlanarPoint{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    });
  };
  auto blob_point = [&](std::size_t i) {
    return sample_in_bbox([&] {
      const double s = spec.blobs[i].sigma_m;
      const double dx = s * rng.normal();
      const double dy = s * rng.normal();
      return PlanarPoint{centers[i]->x + dx, centers[i]->y + dy};
    });
  };

  static const std::vector<std::string> kDomainTags = {"geotagged", "flickr_mobile",
                                                       "instagram_id=", "foursquare_id=",
                                                       "facebook_id="};
  auto make_tags = [&](const WeightedTags* vocab) {
    std::vector<std::string> tags;
    if (vocab && !vocab->empty()) {
      const std::size_t n = spec.min_tags + rng.below(spec.max_tags - spec.min_tags + 1);
      for (std::size_t t = 0; t < n; ++t) tags.push_back((*vocab)[rng.weighted_pick(*vocab)].first);
    }
    if (!spec.common_tags.empty() && rng.uniform() < spec.common_tag_rate) {
      tags.push_back(spec.common_tags[rng.weighted_pick(spec.common_tags)].first);
    }
    if (rng.uniform() < spec.domain_tag_rate) {
      std::string t = kDomainTags[rng.below(kDomainTags.size())];
      if (t.back() == '=') t += std::to_string(rng.below(1000000));
      tags.push_back(std::move(t));
    }
    return tags;
  };
  auto make_time = [&] {
    return spec.time_start +
           static_cast<EpochSeconds>(rng.below(static_cast<std::uint64_t>(spec.time_end - spec.time_start)));
  };

  std::vector<WeightedTags> vocab(k);
  for (std::size_t i = 0; i < k; ++i) {
    vocab[i] = spec.blobs[i].tags;
    if (vocab[i].empty()) {
      const std::string base = "area" + std::to_string(i);
      vocab[i] = {{base, 3.0}, {base + "_square", 2.0}, {base + "_street", 1.0}};
    }
  }

  struct Draft {
    GeoPoint point;
    int label;
    std::size_t blob;
  };
  std::vector<Draft> photo_drafts, poi_drafts;
  std::size_t blob_photos = 0, blob_pois = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < spec.blobs[i].photos; ++j) {
      photo_drafts.push_back({blob_point(i), static_cast<int>(i), i});
    }
    for (std::size_t j = 0; j < spec.blobs[i].pois; ++j) {
      poi_drafts.push_back({blob_point(i), static_cast<int>(i), i});
    }
    blob_photos += spec.blobs[i].photos;
    blob_pois += spec.blobs[i].pois;
  }
  auto noise_count = [&](std::size_t clustered) {
    const double f = spec.noise_fraction;
    return static_cast<std::size_t>(std::llround(f / (1.0 - f) * static_cast<double>(clustered)));
  };
  for (std::size_t j = 0, n = noise_count(blob_photos); j < n; ++j) {
    photo_drafts.push_back({uniform_point(), kNoiseLabel, k});
  }
  for (std::size_t j = 0, n = noise_count(blob_pois); j < n; ++j) {
    poi_drafts.push_back({uniform_point(), kNoiseLabel, k});
  }
  for (std::size_t i = photo_drafts.size(); i > 1; --i) {
    std::swap(photo_drafts[i - 1], photo_drafts[rng.below(i)]);
  }
  for (std::size_t i = poi_drafts.size(); i > 1; --i) {
    std::swap(poi_drafts[i - 1], poi_drafts[rng.below(i)]);
  }

  Dataset ds;
  ds.bbox = spec.bbox;
  ds.ground_truth.emplace();
  ds.photos.reserve(photo_drafts.size());
  for (std::size_t i = 0; i < photo_drafts.size(); ++i) {
    const auto& d = photo_drafts[i];
    PhotoRecord r;
    r.id = detail::padded_id('p', i);
    r.point = d.point;
    r.taken_at = make_time();
    r.user_id = "u" + std::to_string(rng.below(1000));
    r.tags = make_tags(d.blob < k ? &vocab[d.blob] : nullptr);
    (*ds.ground_truth)[r.id] = d.label;
    ds.photos.push_back(std::move(r));
  }
  ds.pois.reserve(poi_drafts.size());
  for (std::size_t i = 0; i < poi_drafts.size(); ++i) {
    const auto& d = poi_drafts[i];
    PoiRecord r;
    r.id = detail::padded_id('v', i);
    r.point = d.point;
    const WeightedCategories* mix = d.blob < k ? &spec.blobs[d.blob].categories : nullptr;
    if (mix && !mix->empty()) {
      r.category = (*mix)[rng.weighted_pick(*mix)].first;
    } else {
      r.category = static_cast<PoiCategory>(rng.below(kPoiCategoryCount - 1));
    }
    (*ds.ground_truth)[r.id] = d.label;
    ds.pois.push_back(std::move(r));
  }
  return ds;
}

inline void write_photos_csv(std::ostream& out, const std::vector<PhotoRecord>& photos) {
  out << "id,lat,lon,taken_at,user_id,tags\n";
  for (const auto& p : photos) {
    std::string tags;
    for (std::size_t i = 0; i < p.tags.size(); ++i) {
      if (i) tags += ';';
      tags += p.tags[i];
    }
    out << csv::quote(p.id) << ',' << detail::format_coord(p.point.lat) << ','
        << detail::format_coord(p.point.lon) << ',' << format_iso8601_utc(p.taken_at) << ','
        << csv::quote(p.user_id) << ',' << csv::quote(tags) << '\n';
  }
}

inline void write_pois_csv(std::ostream& out, const std::vector<PoiRecord>& pois) {
  out << "id,lat,lon,category\n";
  for (const auto& p : pois) {
    out << csv::quote(p.id) << ',' << detail::format_coord(p.point.lat) << ','
        << detail::format_coord(p.point.lon) << ',' << csv::quote(category_name(p.category))
        << '\n';
  }
}

/// `id,label` rows, photos then POIs in dataset order; noise written as "noise".
inline void write_ground_truth_csv(std::ostream& out, const Dataset& ds) {
  out << "id,label\n";
  auto emit = [&](const std::string& id) {
    const int label = ds.ground_truth->at(id);
    out << csv::quote(id) << ',' << (label == kNoiseLabel ? std::string("noise") : std::to_string(label))
        << '\n';
  };
  if (!ds.ground_truth) return;
  for (const auto& p : ds.photos) emit(p.id);
  for (const auto& p : ds.pois) emit(p.id);
}

}  // namespace urbent
