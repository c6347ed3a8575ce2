#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ranges>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "urbent/ingest.hpp"
#include "urbent/refine.hpp"
#include "urbent/stopwords_data.hpp"
#include "urbent/text.hpp"
#include "urbent/timeutil.hpp"

namespace urbent {

/// Europe/Rome standard offset; no DST handling.
inline constexpr int kDefaultTzOffsetMinutes = 60;
inline constexpr std::size_t kDefaultTopK = 10;

struct StopPattern {
  std::string text;
  bool prefix = false;  ///< matches `text` followed by anything

  bool matches(std::string_view tag) const {
    return prefix ? tag.starts_with(text) : tag == text;
  }
};

struct StopLists {
  std::unordered_set<std::string> language_stopwords;
  std::vector<StopPattern> domain_patterns;

  bool is_stopword(std::string_view tag) const {
    if (language_stopwords.contains(std::string(tag))) return true;
    return std::ranges::any_of(domain_patterns, [&](const StopPattern& p) { return p.matches(tag); });
  }
};

/// Adds the entries of one stop-list file. Lines ending in `=` become domain
/// prefix patterns; other lines are literal words, added to the language set
/// unless `as_domain`. Entries are normalized like tags.
inline void load_stoplist(std::istream& in, StopLists& lists, bool as_domain = false) {
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto term = normalize_tag(line);
    if (!term) continue;
    if (term->back() == '=') {
      lists.domain_patterns.push_back({*term, true});
    } else if (as_domain) {
      lists.domain_patterns.push_back({*term, false});
    } else {
      lists.language_stopwords.insert(*term);
    }
  }
}

inline void load_stoplist_file(const std::string& path, StopLists& lists) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open stop list '" + path + "'");
  load_stoplist(in, lists);
}

/// English + Italian function words and the platform tag patterns.
inline StopLists default_stoplists() {
  StopLists lists;
  for (auto data : {stopwords_data::kEnglish, stopwords_data::kItalian}) {
    std::istringstream in{std::string(data)};
    load_stoplist(in, lists);
  }
  std::istringstream domain{std::string(stopwords_data::kDomain)};
  load_stoplist(domain, lists, true);
  return lists;
}

/// Drops stop words, keeping order and multiplicity of the survivors.
inline std::vector<std::string> filter_stopwords(const std::vector<std::string>& tags,
                                                 const StopLists& lists) {
  std::vector<std::string> out;
  for (const auto& t : tags) {
    if (!lists.is_stopword(t)) out.push_back(t);
  }
  return out;
}

template <typename R, typename T>
concept RangeOf = std::ranges::input_range<R> &&
                  std::convertible_to<std::ranges::range_reference_t<R>, const T&>;

using DowHistogram = std::array<std::size_t, 7>;   // Monday..Sunday
using HodHistogram = std::array<std::size_t, 24>;  // hour 0..23

template <RangeOf<PhotoRecord> Photos>
std::pair<DowHistogram, HodHistogram> temporal_histograms(Photos&& photos,
                                                          int tz_offset_minutes = kDefaultTzOffsetMinutes) {
  DowHistogram dow{};
  HodHistogram hod{};
  for (const PhotoRecord& p : photos) {
    const LocalTime t = to_local(p.taken_at, tz_offset_minutes);
    ++dow[static_cast<std::size_t>(t.weekday)];
    ++hod[static_cast<std::size_t>(t.hour)];
  }
  return {dow, hod};
}

using CategoryCounts = std::array<std::size_t, kPoiCategoryCount>;

template <RangeOf<PoiRecord> Pois>
CategoryCounts category_counts(Pois&& pois) {
  CategoryCounts counts{};
  for (const PoiRecord& p : pois) ++counts[static_cast<std::size_t>(p.category)];
  return counts;
}

using YearSeries = std::map<int, std::size_t>;

/// Per tag, the number of photos carrying it in each calendar year (report
/// timezone). A photo counts once per tag however often it repeats the tag.
template <RangeOf<PhotoRecord> Photos>
std::map<std::string, YearSeries> tag_timeseries(Photos&& photos, const std::vector<std::string>& tags,
                                                 int tz_offset_minutes = kDefaultTzOffsetMinutes) {
  std::map<std::string, YearSeries> out;
  for (const auto& t : tags) out[t];
  for (const PhotoRecord& p : photos) {
    const int year = to_local(p.taken_at, tz_offset_minutes).year;
    for (auto& [tag, series] : out) {
      if (std::ranges::find(p.tags, tag) != p.tags.end()) ++series[year];
    }
  }
  return out;
}

using TagMultiset = std::map<std::string, std::size_t>;

struct ScoredTag {
  std::string tag;
  double score = 0.0;

  friend bool operator==(const ScoredTag&, const ScoredTag&) = default;
};

/// Entity-as-document tf-idf:
///   tf(t, e) = count(t, e) / |e|,  idf(t) = ln(N / df(t)).
/// Returns each entity's top K tags by score (ties lexicographic); zero
/// scores are dropped, so tags present in every entity never appear.
inline std::map<std::string, std::vector<ScoredTag>> tfidf_rank(
    const std::map<std::string, TagMultiset>& docs, std::size_t top_k = kDefaultTopK) {
  std::map<std::string, std::size_t> df;
  for (const auto& [id, bag] : docs) {
    for (const auto& [tag, count] : bag) {
      if (count > 0) ++df[tag];
    }
  }
  const auto n_docs = static_cast<double>(docs.size());

  std::map<std::string, std::vector<ScoredTag>> out;
  for (const auto& [id, bag] : docs) {
    std::size_t total = 0;
    for (const auto& [tag, count] : bag) total += count;
    auto& ranked = out[id];
    if (total == 0) continue;
    for (const auto& [tag, count] : bag) {
      if (count == 0) continue;
      const double tf = static_cast<double>(count) / static_cast<double>(total);
      const double idf = std::log(n_docs / static_cast<double>(df.at(tag)));
      const double score = tf * idf;
      if (score > 0.0) ranked.push_back({tag, score});
    }
    std::ranges::sort(ranked, [](const ScoredTag& a, const ScoredTag& b) {
      return a.score != b.score ? a.score > b.score : a.tag < b.tag;
    });
    if (ranked.size() > top_k) ranked.resize(top_k);
  }
  return out;
}

struct EntityProfile {
  std::string entity_id;
  DowHistogram dow_hist{};
  HodHistogram hod_hist{};
  std::vector<ScoredTag> top_tags;
  CategoryCounts category_counts{};
  std::map<std::string, YearSeries> tag_timeseries;
  std::size_t photo_count = 0;
  std::size_t poi_count = 0;
};

struct ProfileOptions {
  StopLists stoplists = default_stoplists();
  std::size_t top_k = kDefaultTopK;
  int tz_offset_minutes = kDefaultTzOffsetMinutes;
};

inline auto entity_photos(const Entity& e, const Dataset& ds) {
  return e.photo_indices |
         std::views::transform([&ds](std::size_t i) -> const PhotoRecord& { return ds.photos[i]; });
}

inline auto entity_pois(const Entity& e, const Dataset& ds) {
  return e.poi_indices |
         std::views::transform([&ds](std::size_t i) -> const PoiRecord& { return ds.pois[i]; });
}

/// Stop-word-filtered tag multiset of one entity's photos.
inline TagMultiset entity_tags(const Entity& e, const Dataset& ds, const StopLists& lists) {
  TagMultiset bag;
  for (const PhotoRecord& p : entity_photos(e, ds)) {
    for (const auto& t : p.tags) {
      if (!lists.is_stopword(t)) ++bag[t];
    }
  }
  return bag;
}

/// Assembles one profile; `ranked` is the entity's entry of tfidf_rank over
/// the whole entity corpus.
inline EntityProfile profile_entity(const Entity& e, const Dataset& ds,
                                    const std::vector<ScoredTag>& ranked,
                                    const ProfileOptions& opt) {
  EntityProfile prof;
  prof.entity_id = e.id;
  prof.photo_count = e.photo_indices.size();
  prof.poi_count = e.poi_indices.size();
  std::tie(prof.dow_hist, prof.hod_hist) = temporal_histograms(entity_photos(e, ds), opt.tz_offset_minutes);
  prof.top_tags.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(ranked.size(), opt.top_k)));
  prof.category_counts = category_counts(entity_pois(e, ds));
  std::vector<std::string> names;
  for (const auto& st : prof.top_tags) names.push_back(st.tag);
  prof.tag_timeseries = tag_timeseries(entity_photos(e, ds), names, opt.tz_offset_minutes);
  return prof;
}

/// Orders refinement-path ids numerically component by component.
inline bool entity_id_less(const std::string& a, const std::string& b) {
  auto parse = [](const std::string& s) {
    std::vector<std::uint64_t> out;
    std::uint64_t cur = 0;
    for (char c : s) {
      if (c == '.') {
        out.push_back(cur);
        cur = 0;
      } else {
        cur = cur * 10 + static_cast<std::uint64_t>(c - '0');
      }
    }
    out.push_back(cur);
    return out;
  };
  return parse(a) < parse(b);
}

/// Profiles every entity: one corpus-wide tf-idf pass, then per-entity
/// assembly. Output is sorted by entity id.
inline std::vector<EntityProfile> profile_entities(const std::vector<Entity>& entities,
                                                   const Dataset& ds, const ProfileOptions& opt) {
  std::map<std::string, TagMultiset> docs;
  for (const auto& e : entities) docs[e.id] = entity_tags(e, ds, opt.stoplists);
  const auto ranked = tfidf_rank(docs, opt.top_k);

  std::vector<EntityProfile> out;
  out.reserve(entities.size());
  for (const auto& e : entities) out.push_back(profile_entity(e, ds, ranked.at(e.id), opt));
  std::ranges::sort(out, [](const EntityProfile& a, const EntityProfile& b) {
    return entity_id_less(a.entity_id, b.entity_id);
  });
  return out;
}

}  // namespace urbent
