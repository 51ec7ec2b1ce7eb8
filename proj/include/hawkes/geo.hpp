#ifndef HAWKES_GEO_HPP
#define HAWKES_GEO_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hawkes/types.hpp"

namespace hawkes {

inline constexpr double kMilesPerLatDegree = 69.17;
inline constexpr double kPi = 3.14159265358979323846;

using Point = std::array<double, 2>;  // lon, lat
using Ring = std::vector<Point>;      // closed: first == last not required

/// One polygon: outer boundary plus interior holes.
struct PolygonShape {
  Ring outer;
  std::vector<Ring> holes;
};

/// Signed shoelace area; positive for counter-clockwise rings.
inline double ring_signed_area(const Ring& ring) {
  double a = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = ring[i];
    const Point& q = ring[(i + 1) % n];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

inline double ring_area(const Ring& ring) { return std::abs(ring_signed_area(ring)); }

/// Even-odd (ray crossing) point-in-ring test.
inline bool point_in_ring(const Point& p, const Ring& ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a[1] > p[1]) != (b[1] > p[1]) &&
        p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0])
      inside = !inside;
  }
  return inside;
}

inline bool point_in_polygon(const Point& p, const PolygonShape& poly) {
  if (!point_in_ring(p, poly.outer)) return false;
  for (const Ring& h : poly.holes)
    if (point_in_ring(p, h)) return false;
  return true;
}

inline double polygon_area(const PolygonShape& poly) {
  double a = ring_area(poly.outer);
  for (const Ring& h : poly.holes) a -= ring_area(h);
  return a;
}

inline std::array<double, 4> ring_bbox(const Ring& ring) {
  std::array<double, 4> box{ring[0][0], ring[0][1], ring[0][0], ring[0][1]};
  for (const Point& p : ring) {
    box[0] = std::min(box[0], p[0]);
    box[1] = std::min(box[1], p[1]);
    box[2] = std::max(box[2], p[0]);
    box[3] = std::max(box[3], p[1]);
  }
  return box;
}

/// A coarse spatial region: either an exact point (degenerate coarsening)
/// or one or more polygons, with a population density and a
/// representative latitude used for mile conversions.
struct Region {
  std::string id;
  bool is_point = false;
  Point point{0.0, 0.0};
  std::vector<PolygonShape> polygons;
  double density = 1.0;
  double representative_latitude = 0.0;

  double area() const {
    if (is_point) return 0.0;
    double a = 0.0;
    for (const auto& poly : polygons) a += polygon_area(poly);
    return a;
  }

  bool contains(const Point& p) const {
    if (is_point) return p == point;
    for (const auto& poly : polygons)
      if (point_in_polygon(p, poly)) return true;
    return false;
  }
};

/// Area-weighted centroid latitude over outer rings (holes ignored;
/// reporting only).
inline double centroid_latitude(const Region& region) {
  if (region.is_point) return region.point[1];
  double wsum = 0.0, lat = 0.0;
  for (const auto& poly : region.polygons) {
    const Ring& ring = poly.outer;
    const double sa = ring_signed_area(ring);
    const std::size_t n = ring.size();
    double cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = ring[i];
      const Point& q = ring[(i + 1) % n];
      cy += (p[1] + q[1]) * (p[0] * q[1] - q[0] * p[1]);
    }
    if (sa != 0.0) {
      cy /= 6.0 * sa;
      lat += cy * std::abs(sa);
      wsum += std::abs(sa);
    }
  }
  if (wsum == 0.0) throw std::runtime_error("centroid_latitude: region " + region.id + " has zero area");
  return lat / wsum;
}

/// Uniform draw from a region by area-weighted part selection and
/// bounding-box rejection sampling.
inline Point sample_point_in_region(const Region& region, std::mt19937_64& rng,
                                    std::size_t attempt_budget = 10000) {
  if (region.is_point) return region.point;
  std::vector<double> areas;
  double total = 0.0;
  for (const auto& poly : region.polygons) {
    areas.push_back(polygon_area(poly));
    total += areas.back();
  }
  if (!(total > 0.0))
    throw std::runtime_error("sample_point_in_region: region " + region.id + " has zero area");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double pick = unit(rng) * total;
  std::size_t part = 0;
  while (part + 1 < areas.size() && pick >= areas[part]) pick -= areas[part], ++part;
  const PolygonShape& poly = region.polygons[part];
  const auto box = ring_bbox(poly.outer);
  for (std::size_t attempt = 0; attempt < attempt_budget; ++attempt) {
    const Point p{box[0] + unit(rng) * (box[2] - box[0]), box[1] + unit(rng) * (box[3] - box[1])};
    if (point_in_polygon(p, poly)) return p;
  }
  throw std::runtime_error("sample_point_in_region: rejection budget exhausted for region " +
                           region.id);
}

// ---------------------------------------------------------------------------
// Degree/mile conversions and effective lengthscales

/// (miles per latitudinal degree, miles per longitudinal degree) at the
/// given latitude; longitudinal degrees shrink as cos(lat * pi/180).
inline std::pair<double, double> degree_mile_factors(double latitude) {
  if (!(std::abs(latitude) < 90.0))
    throw std::invalid_argument("degree_mile_factors: latitude must lie in (-90, 90)");
  return {kMilesPerLatDegree, std::cos(latitude * kPi / 180.0) * kMilesPerLatDegree};
}

/// Convention for turning population density into an effective spatial
/// lengthscale: the sqrt form sigma_x / sqrt(D) (the model's kernel
/// scale), or the linear form sigma_x / D (used for reported
/// per-county lengthscales).
enum class DensityConvention { sqrt_density, linear_density };

inline DensityConvention density_convention_from_string(const std::string& s) {
  if (s == "sqrt") return DensityConvention::sqrt_density;
  if (s == "linear") return DensityConvention::linear_density;
  throw std::invalid_argument("unknown density convention: " + s);
}

inline double effective_lengthscale_degrees(const HawkesParams& params, double density,
                                            DensityConvention convention) {
  if (!(density > 0.0)) throw std::invalid_argument("effective_lengthscale_degrees: density must be positive");
  if (params.variant == Variant::constant) return params.sigma_x;
  return convention == DensityConvention::sqrt_density ? params.sigma_x / std::sqrt(density)
                                                       : params.sigma_x / density;
}

enum class MileConvention { latitudinal, longitudinal, averaged };

inline MileConvention mile_convention_from_string(const std::string& s) {
  if (s == "latitudinal") return MileConvention::latitudinal;
  if (s == "longitudinal") return MileConvention::longitudinal;
  if (s == "averaged") return MileConvention::averaged;
  throw std::invalid_argument("unknown mile convention: " + s);
}

inline double lengthscale_to_miles(double degrees, double latitude, MileConvention convention) {
  const auto [lat_f, lon_f] = degree_mile_factors(latitude);
  switch (convention) {
    case MileConvention::latitudinal: return degrees * lat_f;
    case MileConvention::longitudinal: return degrees * lon_f;
    case MileConvention::averaged: return degrees * 0.5 * (lat_f + lon_f);
  }
  throw std::logic_error("lengthscale_to_miles: bad convention");
}

/// A if overridden, else the axis-aligned bounding-box area of the
/// catalog's locations in square degrees; degenerate boxes are padded by
/// 1e-6 degrees per side.
inline double domain_area(const Catalog& catalog, std::optional<double> override = std::nullopt) {
  if (override) {
    if (!(*override > 0.0)) throw std::invalid_argument("domain_area: override must be positive");
    return *override;
  }
  double lon_min = catalog[0].lon, lon_max = lon_min;
  double lat_min = catalog[0].lat, lat_max = lat_min;
  for (const Event& e : catalog.events()) {
    lon_min = std::min(lon_min, e.lon);
    lon_max = std::max(lon_max, e.lon);
    lat_min = std::min(lat_min, e.lat);
    lat_max = std::max(lat_max, e.lat);
  }
  constexpr double pad = 1e-6;
  double w = lon_max - lon_min;
  double h = lat_max - lat_min;
  if (w <= 0.0) w = 2 * pad;
  if (h <= 0.0) h = 2 * pad;
  return w * h;
}

// ---------------------------------------------------------------------------
// Region table

/// County polygons and population densities keyed by region id, immutable
/// after load.
class RegionTable {
 public:
  void add(Region region) {
    if (region.id.empty()) throw std::invalid_argument("RegionTable: empty region id");
    if (!regions_.emplace(region.id, order_.size()).second)
      throw std::invalid_argument("RegionTable: duplicate region id " + region.id);
    order_.push_back(std::move(region));
  }

  bool contains(const std::string& id) const { return regions_.count(id) != 0; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  const Region& at(const std::string& id) const {
    auto it = regions_.find(id);
    if (it == regions_.end()) throw std::out_of_range("RegionTable: unknown region id " + id);
    return order_[it->second];
  }

  /// Regions in load order; this order is the coarsening tie-break.
  const std::vector<Region>& regions() const { return order_; }

  void set_density(const std::string& id, double density) {
    auto it = regions_.find(id);
    if (it == regions_.end()) throw std::out_of_range("RegionTable: unknown region id " + id);
    if (!(density > 0.0)) throw std::invalid_argument("RegionTable: density must be positive for " + id);
    order_[it->second].density = density;
  }

  /// Loads a GeoJSON FeatureCollection.  Each feature needs the id
  /// property; density is taken from the density property when present.
  static RegionTable from_geojson(const std::string& path, const std::string& id_key = "id",
                                  const std::string& density_key = "density") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("RegionTable: cannot open " + path);
    nlohmann::json doc;
    in >> doc;
    return from_geojson_doc(doc, id_key, density_key);
  }

  static RegionTable from_geojson_doc(const nlohmann::json& doc, const std::string& id_key = "id",
                                      const std::string& density_key = "density") {
    if (doc.value("type", "") != "FeatureCollection")
      throw std::runtime_error("RegionTable: expected a GeoJSON FeatureCollection");
    RegionTable table;
    for (const auto& feature : doc.at("features")) {
      Region region;
      const auto& props = feature.at("properties");
      if (!props.contains(id_key))
        throw std::runtime_error("RegionTable: feature missing property " + id_key);
      const auto& idv = props.at(id_key);
      region.id = idv.is_string() ? idv.get<std::string>() : idv.dump();
      if (props.contains(density_key)) region.density = props.at(density_key).get<double>();
      if (!(region.density > 0.0))
        throw std::runtime_error("RegionTable: nonpositive density for region " + region.id);
      const auto& geom = feature.at("geometry");
      const std::string type = geom.at("type").get<std::string>();
      const auto& coords = geom.at("coordinates");
      if (type == "Point") {
        region.is_point = true;
        region.point = {coords.at(0).get<double>(), coords.at(1).get<double>()};
      } else if (type == "Polygon") {
        region.polygons.push_back(parse_polygon(coords));
      } else if (type == "MultiPolygon") {
        for (const auto& poly : coords) region.polygons.push_back(parse_polygon(poly));
      } else {
        throw std::runtime_error("RegionTable: unsupported geometry type " + type + " for region " +
                                 region.id);
      }
      region.representative_latitude = centroid_latitude(region);
      table.add(std::move(region));
    }
    return table;
  }

  /// Overrides densities from a two-column CSV: region_id,density.
  void load_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("RegionTable: cannot open " + path);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw std::runtime_error("RegionTable: bad density row " + std::to_string(row));
      const std::string id = line.substr(0, comma);
      if (row == 1 && id == "region_id") continue;  // header
      double density;
      try {
        density = std::stod(line.substr(comma + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("RegionTable: bad density value at row " + std::to_string(row));
      }
      set_density(id, density);
    }
  }

 private:
  static PolygonShape parse_polygon(const nlohmann::json& rings) {
    PolygonShape shape;
    if (rings.empty()) throw std::runtime_error("RegionTable: polygon without rings");
    for (std::size_t r = 0; r < rings.size(); ++r) {
      Ring ring;
      for (const auto& pt : rings[r]) ring.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
      if (ring.size() < 3) throw std::runtime_error("RegionTable: ring with fewer than 3 vertices");
      if (r == 0)
        shape.outer = std::move(ring);
      else
        shape.holes.push_back(std::move(ring));
    }
    return shape;
  }

  std::unordered_map<std::string, std::size_t> regions_;
  std::vector<Region> order_;
};

}  // namespace hawkes

#endif  // HAWKES_GEO_HPP
