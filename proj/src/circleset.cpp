#include "lacuna/circleset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lacuna/error.hpp"

namespace lacuna {

namespace {

constexpr std::size_t kMinSuperlevelGrid = 64;
// Relative slack on the interpolated peak height.
constexpr double kPeakMargin = 1e-2;
// Round-off allowance on |p|^2, relative to the squared coefficient L1 mass.
constexpr double kPeakNoise = 1e-12;

double wrap(double x) noexcept {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

bool in_arc(const Arc& arc, double x, double tol) noexcept {
  const double offset = wrap(x - arc.start);
  return offset <= arc.length() + tol || kTwoPi - offset <= tol;
}

}  // namespace

ArcSet ArcSet::full_circle() {
  ArcSet s;
  s.full_ = true;
  return s;
}

ArcSet ArcSet::from_arcs(std::vector<Arc> input, double merge_tol) {
  std::vector<Arc> pieces;
  pieces.reserve(input.size() + 1);
  for (const Arc& a : input) {
    const double len = a.end - a.start;
    if (!(len > 0.0)) continue;
    if (len >= kTwoPi - merge_tol) return full_circle();
    const double s = wrap(a.start);
    const double e = s + len;
    if (e > kTwoPi) {
      pieces.push_back({s, kTwoPi});
      pieces.push_back({0.0, e - kTwoPi});
    } else {
      pieces.push_back({s, e});
    }
  }
  if (pieces.empty()) return {};

  std::sort(pieces.begin(), pieces.end(),
            [](const Arc& a, const Arc& b) { return a.start < b.start || (a.start == b.start && a.end < b.end); });
  std::vector<Arc> merged;
  merged.reserve(pieces.size());
  for (const Arc& a : pieces) {
    if (!merged.empty() && a.start <= merged.back().end + merge_tol)
      merged.back().end = std::max(merged.back().end, a.end);
    else
      merged.push_back(a);
  }

  // Join across 0 when the first and last arcs touch there.
  if (merged.front().start <= merge_tol && merged.back().end >= kTwoPi - merge_tol) {
    if (merged.size() == 1) return full_circle();
    Arc joined{merged.back().start, merged.front().end + kTwoPi};
    merged.erase(merged.begin());
    merged.back() = joined;
    if (joined.length() >= kTwoPi - merge_tol) return full_circle();
  }

  ArcSet out;
  out.arcs_ = std::move(merged);
  return out;
}

double ArcSet::measure() const noexcept {
  if (full_) return kTwoPi;
  double acc = 0.0;
  for (const Arc& a : arcs_) acc += a.length();
  return acc;
}

bool ArcSet::contains(double x, double tol) const noexcept {
  if (full_) return true;
  if (arcs_.empty()) return false;
  const double p = wrap(x);
  auto it = std::upper_bound(arcs_.begin(), arcs_.end(), p + tol,
                             [](double v, const Arc& a) { return v < a.start; });
  const std::ptrdiff_t idx = (it - arcs_.begin()) - 1;
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(arcs_.size()) - 1;
  for (std::ptrdiff_t i : {idx - 1, idx, std::ptrdiff_t{0}, last}) {
    if (i < 0 || i > last) continue;
    if (in_arc(arcs_[static_cast<std::size_t>(i)], p, tol)) return true;
  }
  return false;
}

std::size_t superlevel_grid_size(std::int64_t degree, const SuperlevelOptions& opts) {
  if (opts.oversample < 4) throw Error(ErrorCode::InvalidParam, "superlevel oversample must be >= 4");
  const std::size_t g =
      next_pow2(static_cast<std::size_t>(opts.oversample) * static_cast<std::size_t>(degree + 1));
  return std::max<std::size_t>(g, kMinSuperlevelGrid);
}

namespace {

struct Run {
  std::size_t first;  // unwrapped node indices, first <= last
  std::size_t last;
};

// Maximal runs of nodes above the threshold; empty optional means every
// node is above.
std::optional<std::vector<Run>> runs_above(std::span<const double> modulus_sq, double level,
                                           std::int64_t degree) {
  const std::size_t g = modulus_sq.size();
  std::size_t start = g;
  for (std::size_t k = 0; k < g; ++k) {
    if (!(modulus_sq[k] > level)) {
      start = k;
      break;
    }
  }
  if (start == g) return std::nullopt;

  std::vector<Run> runs;
  bool inside = false;
  std::size_t first = 0;
  for (std::size_t i = 1; i <= g; ++i) {
    const std::size_t k = start + i;
    const bool above = i < g && modulus_sq[k % g] > level;
    if (above && !inside) {
      inside = true;
      first = k;
    } else if (!above && inside) {
      inside = false;
      runs.push_back({first, k - 1});
    }
  }
  const auto limit = static_cast<std::size_t>(4 * std::max<std::int64_t>(degree, 1));
  if (runs.size() > limit) {
    std::ostringstream os;
    os << runs.size() * 2 << " crossings exceed 8 * degree = " << 8 * std::max<std::int64_t>(degree, 1);
    throw Error(ErrorCode::ResolutionExceeded, os.str());
  }
  return runs;
}

// Golden-section search on [a, b] for the maximum of sign * f.
template <class F>
double golden_extremum(const F& f, double a, double b, double sign, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = sign * f(x1), f2 = sign * f(x2);
  while (b - a > tol) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = sign * f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = sign * f(x2);
    }
  }
  return f1 > f2 ? x1 : x2;
}

// Parabolic vertex through three equispaced samples centred on b.
double parabolic_vertex(double a, double b, double c) noexcept {
  const double curv = 2.0 * b - a - c;
  return curv > 0.0 ? b + (c - a) * (c - a) / (8.0 * curv) : b;
}

// Runs snapped outward to the neighbouring nodes, plus the two cells around
// each discrete local maximum whose interpolated height nearly reaches the
// level. With `p` such a peak is kept only if its true maximum reaches the
// level up to round-off.
ArcSet snapped_arcs(std::span<const double> modulus_sq, double theta, std::int64_t degree, double tol_x,
                    const TrigPoly* p) {
  const std::size_t g = modulus_sq.size();
  const double level = theta * theta;
  const auto runs = runs_above(modulus_sq, level, degree);
  if (!runs) return ArcSet::full_circle();
  const double h = kTwoPi / static_cast<double>(g);
  std::vector<Arc> arcs;
  arcs.reserve(runs->size());
  for (const Run& r : *runs)
    arcs.push_back({static_cast<double>(r.first - 1) * h, static_cast<double>(r.last + 1) * h});
  if (g >= 3) {
    const double noise = p ? kPeakNoise * p->coeff_l1() * p->coeff_l1() : 0.0;
    for (std::size_t k = 0; k < g; ++k) {
      const double b = modulus_sq[k];
      const double a = modulus_sq[(k + g - 1) % g];
      const double c = modulus_sq[(k + 1) % g];
      if (b > level || a > level || c > level || b < a || b < c) continue;
      if (parabolic_vertex(a, b, c) < level * (1.0 - kPeakMargin)) continue;
      const double x = static_cast<double>(k) * h;
      if (p) {
        const auto f = [p](double y) { return std::norm((*p)(y)); };
        if (f(golden_extremum(f, x - h, x + h, 1.0, tol_x)) < level - noise) continue;
      }
      arcs.push_back({x - h, x + h});
    }
  }
  return ArcSet::from_arcs(std::move(arcs), 2.0 * tol_x);
}

}  // namespace

ArcSet superlevel_from_samples(std::span<const double> modulus_sq, double theta,
                               std::int64_t degree, double tol_x) {
  if (!(theta > 0.0)) throw Error(ErrorCode::InvalidParam, "threshold must be positive");
  const std::size_t g = modulus_sq.size();
  if (g == 0) throw Error(ErrorCode::GridTooSmall, "empty sample grid");
  return snapped_arcs(modulus_sq, theta, degree, tol_x, nullptr);
}

ArcSet superlevel_arcs(const TrigPoly& p, double theta, const SuperlevelOptions& opts,
                       std::optional<double> known_sup_upper) {
  if (!(theta > 0.0)) throw Error(ErrorCode::InvalidParam, "threshold must be positive");
  if (known_sup_upper && *known_sup_upper < theta) return {};

  const std::size_t g = superlevel_grid_size(p.degree(), opts);
  std::vector<double> modsq;
  {
    const auto values = sample(p, g);
    modsq.resize(g);
    for (std::size_t k = 0; k < g; ++k) modsq[k] = std::norm(values[k]);
  }
  const double grid_max = std::sqrt(*std::max_element(modsq.begin(), modsq.end()));
  const double factor = 1.0 - std::numbers::pi * static_cast<double>(p.degree()) / static_cast<double>(g);
  if (grid_max / factor < theta) return {};

  if (!opts.refine) return snapped_arcs(modsq, theta, p.degree(), opts.tol_x, &p);

  const auto runs = runs_above(modsq, theta * theta, p.degree());
  if (!runs) return ArcSet::full_circle();
  const double h = kTwoPi / static_cast<double>(g);
  const double level = theta * theta;
  auto g_at = [&](double x) { return std::norm(p(x)) - level; };
  // Bracketed root search between a node below (lo) and a node above (hi):
  // Illinois false position, falling back to bisection when it stalls.
  // Returns the below-side bracket end so the arc never shrinks past the root.
  auto crossing = [&](double lo, double hi) {
    double g_lo = g_at(lo), g_hi = g_at(hi);
    int side = 0;
    for (int iter = 0; std::abs(hi - lo) > opts.tol_x; ++iter) {
      double x = 0.5 * (lo + hi);
      if (iter % 4 != 3 && g_hi != g_lo) {
        const double t = g_hi / (g_hi - g_lo);
        const double cand = hi + t * (lo - hi);
        if (std::isfinite(cand) && (cand - lo) * (cand - hi) < 0.0) x = cand;
      }
      // Nudge toward the far end so the bracket closes from both sides.
      const double step = opts.tol_x * 0.5;
      if (std::abs(x - lo) < step) x = lo + std::copysign(step, hi - lo);
      if (std::abs(x - hi) < step) x = hi - std::copysign(step, hi - lo);
      const double gx = g_at(x);
      if (gx > 0.0) {
        hi = x;
        g_hi = gx;
        if (side == 1) g_lo *= 0.5;
        side = 1;
      } else {
        lo = x;
        g_lo = gx;
        if (side == -1) g_hi *= 0.5;
        side = -1;
      }
    }
    return lo;
  };
  auto extremum = [&](double a, double b, double sign) { return golden_extremum(g_at, a, b, sign, opts.tol_x); };
  auto vertex = [](double a, double b, double c) {
    const double curv = 2.0 * b - a - c;
    return curv != 0.0 ? b + (c - a) * (c - a) / (8.0 * curv) : b;
  };
  auto at = [&](std::size_t k) { return modsq[k % g]; };

  std::vector<Arc> arcs;
  arcs.reserve(runs->size());
  for (const Run& r : *runs) {
    double start = crossing(static_cast<double>(r.first - 1) * h, static_cast<double>(r.first) * h);
    // A dip below the level between two nodes above it splits the run.
    for (std::size_t k = r.first + 1; k < r.last; ++k) {
      const double a = at(k - 1), b = at(k), c = at(k + 1);
      if (b > a || b > c || vertex(a, b, c) > level * (1.0 + kPeakMargin)) continue;
      const double x = static_cast<double>(k) * h;
      const double xm = extremum(x - h, x + h, -1.0);
      if (g_at(xm) > 0.0) continue;
      arcs.push_back({start, crossing(xm, x - h)});
      start = crossing(xm, x + h);
    }
    arcs.push_back({start, crossing(static_cast<double>(r.last + 1) * h, static_cast<double>(r.last) * h)});
  }
  // A peak between two nodes below the level leaves no run.
  if (g >= 3) {
    for (std::size_t k = 0; k < g; ++k) {
      const double a = at(k + g - 1), b = modsq[k], c = at(k + 1);
      if (b > level || a > level || c > level || b < a || b < c) continue;
      if (vertex(a, b, c) < level * (1.0 - kPeakMargin)) continue;
      const double x = static_cast<double>(k) * h;
      const double xm = extremum(x - h, x + h, 1.0);
      if (!(g_at(xm) > 0.0)) continue;
      arcs.push_back({crossing(x - h, xm), crossing(x + h, xm)});
    }
  }
  return ArcSet::from_arcs(std::move(arcs), 2.0 * opts.tol_x);
}

ArcSet expand(const ArcSet& a, double eps, double tol_x) {
  if (eps < 0.0) throw Error(ErrorCode::InvalidParam, "expansion radius must be >= 0");
  if (a.full() || a.empty() || eps == 0.0) return a;
  std::vector<Arc> grown;
  grown.reserve(a.components());
  for (const Arc& arc : a.arcs()) {
    if (arc.length() + 2.0 * eps >= kTwoPi) return ArcSet::full_circle();
    grown.push_back({arc.start - eps, arc.end + eps});
  }
  return ArcSet::from_arcs(std::move(grown), 2.0 * tol_x);
}

ArcSet unite(std::span<const ArcSet> sets, double tol_x) {
  std::vector<Arc> all;
  for (const ArcSet& s : sets) {
    if (s.full()) return ArcSet::full_circle();
    all.insert(all.end(), s.arcs().begin(), s.arcs().end());
  }
  return ArcSet::from_arcs(std::move(all), 2.0 * tol_x);
}

ArcSet unite(const ArcSet& a, const ArcSet& b, double tol_x) {
  const ArcSet both[] = {a, b};
  return unite(both, tol_x);
}

double lattice_point(std::int64_t l, std::int64_t d) noexcept {
  std::int64_t r = l % d;
  if (r < 0) r += d;
  return kTwoPi * static_cast<double>(r) / static_cast<double>(d);
}

std::vector<std::int64_t> survivors(const ArcSet& a, std::int64_t d, double tol_x) {
  if (d < 1) throw Error(ErrorCode::InvalidParam, "lattice size must be >= 1");
  std::vector<std::int64_t> out;
  if (a.full()) return out;
  std::vector<char> excluded(static_cast<std::size_t>(d), 0);
  const double per = static_cast<double>(d) / kTwoPi;
  for (const Arc& arc : a.arcs()) {
    const auto lo = static_cast<std::int64_t>(std::ceil((arc.start - tol_x) * per)) - 1;
    const auto hi = static_cast<std::int64_t>(std::floor((arc.end + tol_x) * per)) + 1;
    for (std::int64_t l = lo; l <= hi; ++l) {
      std::int64_t r = l % d;
      if (r < 0) r += d;
      if (excluded[static_cast<std::size_t>(r)]) continue;
      if (in_arc(arc, lattice_point(r, d), tol_x)) excluded[static_cast<std::size_t>(r)] = 1;
    }
  }
  out.reserve(static_cast<std::size_t>(d));
  for (std::int64_t l = 1; l <= d; ++l)
    if (!excluded[static_cast<std::size_t>(l % d)]) out.push_back(l);
  return out;
}

}  // namespace lacuna
