#ifndef HAWKES_TYPES_HPP
#define HAWKES_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hawkes {

/// Which triggering-kernel spatial scale to use: a single global
/// lengthscale, or one modulated by the source event's population density.
enum class Variant { constant, varying };

inline const char* to_string(Variant v) {
  return v == Variant::constant ? "constant" : "varying";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "constant") return Variant::constant;
  if (s == "varying") return Variant::varying;
  throw std::invalid_argument("unknown variant: " + s);
}

/// One observed case: time in weeks, planar location in degrees,
/// coarse-region id and local population density (persons per sq. mile).
struct Event {
  double t = 0.0;
  double lon = 0.0;
  double lat = 0.0;
  std::string region_id;
  double density = 1.0;
};

/// Immutable, time-ordered event set.  Construction validates the
/// ordering and per-event invariants; everything downstream relies on
/// times being nondecreasing.
class Catalog {
 public:
  explicit Catalog(std::vector<Event> events, bool coarse_only = false)
      : events_(std::move(events)), coarse_only_(coarse_only) {
    if (events_.empty()) throw std::invalid_argument("Catalog: need at least one event");
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const Event& e = events_[i];
      if (!(e.t >= 0.0) || !std::isfinite(e.t))
        throw std::invalid_argument("Catalog: event " + std::to_string(i) + " has invalid time");
      if (!(e.density > 0.0))
        throw std::invalid_argument("Catalog: event " + std::to_string(i) + " has nonpositive density");
      if (!coarse_only_ && (!std::isfinite(e.lon) || !std::isfinite(e.lat)))
        throw std::invalid_argument("Catalog: event " + std::to_string(i) + " has non-finite location");
      if (i > 0 && events_[i - 1].t > e.t)
        throw std::invalid_argument("Catalog: times not sorted at index " + std::to_string(i));
    }
  }

  /// Sorts by time first (stable), then validates.
  static Catalog sorted(std::vector<Event> events, bool coarse_only = false) {
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return Catalog(std::move(events), coarse_only);
  }

  std::size_t size() const { return events_.size(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }
  const std::vector<Event>& events() const { return events_; }
  double t_end() const { return events_.back().t; }

  /// True when the catalog carries only region ids, no exact locations;
  /// such a catalog is usable only through the cut-posterior fit path.
  bool coarse_only() const { return coarse_only_; }

 private:
  std::vector<Event> events_;
  bool coarse_only_;
};

/// The five Hawkes model parameters plus the kernel variant and the
/// spatial-domain area A.  All five parameters and the area are strictly
/// positive.
struct HawkesParams {
  double mu0 = 1.0;      // background weight
  double tau_t = 1.0;    // background temporal lengthscale (weeks)
  double xi0 = 1.0;      // self-excitatory weight
  double sigma_x = 1.0;  // triggering spatial lengthscale (degrees)
  double sigma_t = 1.0;  // triggering temporal lengthscale (weeks)
  double area = 1.0;     // A, square degrees
  Variant variant = Variant::constant;

  void validate() const {
    auto pos = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("HawkesParams: ") + name + " must be positive and finite");
    };
    pos(mu0, "mu0");
    pos(tau_t, "tau_t");
    pos(xi0, "xi0");
    pos(sigma_x, "sigma_x");
    pos(sigma_t, "sigma_t");
    pos(area, "area");
  }

  // Precision-form accessors matching the evaluation kernel's inputs.
  double sigma_x_prec() const { return 1.0 / sigma_x; }
  double tau_t_prec() const { return 1.0 / tau_t; }
  double omega() const { return 1.0 / sigma_t; }
  double inv_area() const { return 1.0 / area; }
};

enum class Precision { single, dbl };

inline const char* to_string(Precision p) {
  return p == Precision::single ? "single" : "double";
}

inline Precision precision_from_string(const std::string& s) {
  if (s == "single") return Precision::single;
  if (s == "double") return Precision::dbl;
  throw std::invalid_argument("unknown precision: " + s);
}

}  // namespace hawkes

#endif  // HAWKES_TYPES_HPP
