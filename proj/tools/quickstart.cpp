// Minimal library use: generate a small synthetic city, cluster it and print
// each entity with its strongest tags.

#include <cstdio>
#include <sstream>

#include "urbent/urbent.hpp"

int main() {
  std::istringstream spec_text(
      "clusters = 4\n"
      "photos = 2000\n"
      "pois = 200\n"
      "sigma_m = 60\n"
      "noise_fraction = 0.1\n");
  const urbent::Dataset ds = urbent::generate_synthetic(urbent::parse_synthetic_spec(spec_text), 7);

  urbent::RefinePolicy policy;
  policy.max_fraction = 0.5;
  const urbent::RefineResult result = urbent::iterative_cluster(ds, urbent::Params{150.0, 25}, policy);
  const auto profiles = urbent::profile_entities(result.entities, ds, urbent::ProfileOptions{});

  for (std::size_t i = 0; i < result.entities.size(); ++i) {
    const auto& e = result.entities[i];
    const auto& p = profiles[i];
    std::printf("entity %s: %zu photos, %zu POIs, radius %.0f m, centroid %.5f,%.5f\n", e.id.c_str(),
                p.photo_count, p.poi_count, e.radius_m, e.centroid.lat, e.centroid.lon);
    for (const auto& t : p.top_tags) std::printf("    %-20s %.4f\n", t.tag.c_str(), t.score);
  }
  std::printf("%zu of %zu points fell outside every entity\n",
              result.fates.total - result.fates.in_entities, result.fates.total);
}
