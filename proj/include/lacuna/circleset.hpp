#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "lacuna/trigpoly.hpp"

namespace lacuna {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDefaultTolX = kTwoPi * 0x1p-40;

// Arc [start, end] on the circle with 0 <= start < 2 pi and
// 0 < end - start <= 2 pi. Only the last arc of a set may have end > 2 pi.
struct Arc {
  double start = 0.0;
  double end = 0.0;

  double length() const noexcept { return end - start; }
  friend bool operator==(const Arc&, const Arc&) = default;
};

// Finite union of disjoint closed-or-open arcs; boundaries are not
// distinguished. Adjacent arcs are kept at least `merge_tol` apart.
class ArcSet {
 public:
  ArcSet() = default;

  static ArcSet full_circle();
  // Arcs may overlap, wrap past 2 pi or start anywhere; they are normalized.
  static ArcSet from_arcs(std::vector<Arc> arcs, double merge_tol = 2.0 * kDefaultTolX);

  bool full() const noexcept { return full_; }
  bool empty() const noexcept { return !full_ && arcs_.empty(); }
  std::span<const Arc> arcs() const noexcept { return arcs_; }

  double measure() const noexcept;
  std::size_t components() const noexcept { return full_ ? 1 : arcs_.size(); }

  // Point membership; points within `tol` of an arc count as inside.
  bool contains(double x, double tol = 0.0) const noexcept;

  friend bool operator==(const ArcSet&, const ArcSet&) = default;

 private:
  bool full_ = false;
  std::vector<Arc> arcs_;
};

struct SuperlevelOptions {
  int oversample = 8;  // grid = max(64, next_pow2(oversample * (degree + 1))); >= 4
  bool refine = false;  // root-refined endpoints instead of outward grid snapping
  double tol_x = kDefaultTolX;
};

std::size_t superlevel_grid_size(std::int64_t degree, const SuperlevelOptions& opts);

// {x : |p(x)| > theta}. `known_sup_upper`, when given, is a certified upper
// bound for sup |p|; if it is below theta the set is empty without sampling.
ArcSet superlevel_arcs(const TrigPoly& p, double theta, const SuperlevelOptions& opts = {},
                       std::optional<double> known_sup_upper = std::nullopt);

// Conservative extraction from precomputed |p(x_k)|^2 on x_k = 2 pi k / G:
// each run of nodes above theta^2 becomes the arc between the neighbouring
// nodes below it.
ArcSet superlevel_from_samples(std::span<const double> modulus_sq, double theta,
                               std::int64_t degree, double tol_x = kDefaultTolX);

ArcSet expand(const ArcSet& a, double eps, double tol_x = kDefaultTolX);

ArcSet unite(std::span<const ArcSet> sets, double tol_x = kDefaultTolX);
ArcSet unite(const ArcSet& a, const ArcSet& b, double tol_x = kDefaultTolX);

// {l in 1..d : 2 pi l / d not in a}; points within tol_x of an arc are
// treated as inside. l = d is the point 0.
std::vector<std::int64_t> survivors(const ArcSet& a, std::int64_t d, double tol_x = kDefaultTolX);

// Lattice point 2 pi l / d in [0, 2 pi).
double lattice_point(std::int64_t l, std::int64_t d) noexcept;

}  // namespace lacuna
