#include "lacuna/trigpoly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "lacuna/error.hpp"

namespace lacuna {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Phase s*x reduced mod 2 pi in extended precision, so large frequencies keep
// their accuracy.
double reduced_phase(std::int64_t s, double x) {
  constexpr long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double t = std::fmod(static_cast<long double>(s) * static_cast<long double>(x), two_pi);
  return static_cast<double>(t);
}

std::size_t fold_index(std::int64_t s, std::size_t grid) {
  const auto g = static_cast<std::int64_t>(grid);
  std::int64_t r = s % g;
  if (r < 0) r += g;
  return static_cast<std::size_t>(r);
}

}  // namespace

TrigPoly::TrigPoly(std::int64_t min_freq, std::vector<cplx> coeffs, bool padded)
    : min_freq_(min_freq), coeffs_(std::move(coeffs)), padded_(padded) {
  if (coeffs_.empty()) throw Error(ErrorCode::InvalidParam, "polynomial needs at least one coefficient");
  if (!padded_ && (coeffs_.front() == cplx{} || coeffs_.back() == cplx{}))
    throw Error(ErrorCode::InvalidParam, "zero end coefficient in a non-padded polynomial");
}

TrigPoly TrigPoly::monomial(std::int64_t freq, cplx value) {
  return TrigPoly(freq, {value}, value == cplx{});
}

TrigPoly TrigPoly::zero() { return TrigPoly(0, {cplx{}}, true); }

cplx TrigPoly::coeff(std::int64_t s) const noexcept {
  if (s < min_freq_ || s > max_freq()) return {};
  return coeffs_[static_cast<std::size_t>(s - min_freq_)];
}

std::int64_t TrigPoly::degree() const noexcept {
  return std::max(std::abs(min_freq_), std::abs(max_freq()));
}

double TrigPoly::coeff_l1() const noexcept {
  double acc = 0.0;
  for (const auto& c : coeffs_) acc += std::abs(c);
  return acc;
}

cplx TrigPoly::operator()(double x) const {
  constexpr std::size_t kReseed = 256;
  const cplx step = std::polar(1.0, x);
  cplx acc{};
  cplx w{};
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (i % kReseed == 0)
      w = std::polar(1.0, reduced_phase(min_freq_ + static_cast<std::int64_t>(i), x));
    acc += coeffs_[i] * w;
    w *= step;
  }
  return acc;
}

TrigPoly TrigPoly::trimmed() const {
  std::size_t lo = 0;
  std::size_t hi = coeffs_.size();
  while (lo < hi && coeffs_[lo] == cplx{}) ++lo;
  while (hi > lo && coeffs_[hi - 1] == cplx{}) --hi;
  if (lo == hi) return TrigPoly(min_freq_, {cplx{}}, true);
  return TrigPoly(min_freq_ + static_cast<std::int64_t>(lo),
                  std::vector<cplx>(coeffs_.begin() + static_cast<std::ptrdiff_t>(lo),
                                    coeffs_.begin() + static_cast<std::ptrdiff_t>(hi)));
}

TrigPoly fejer(std::int64_t d) {
  if (d < 0) throw Error(ErrorCode::InvalidParam, "Fejer kernel order must be >= 0");
  std::vector<cplx> c(static_cast<std::size_t>(2 * d + 1));
  const double denom = static_cast<double>(d + 1);
  for (std::int64_t k = -d; k <= d; ++k)
    c[static_cast<std::size_t>(k + d)] = 0.5 * (1.0 - static_cast<double>(std::abs(k)) / denom);
  return TrigPoly(-d, std::move(c));
}

std::size_t next_pow2(std::size_t n) {
  std::size_t g = 1;
  while (g < n) g <<= 1;
  return g;
}

std::vector<cplx> sample(const TrigPoly& p, std::size_t grid) {
  if (grid == 0) throw Error(ErrorCode::GridTooSmall, "grid must be positive");
  std::vector<cplx> buf(grid);
  const auto coeffs = p.coeffs();
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    buf[fold_index(p.min_freq() + static_cast<std::int64_t>(i), grid)] += coeffs[i];
  detail::dft_backward(buf);
  return buf;
}

std::vector<cplx> grid_eval(const TrigPoly& p, std::size_t grid) {
  if (grid <= static_cast<std::size_t>(2 * p.degree())) {
    std::ostringstream os;
    os << "grid " << grid << " must exceed twice the degree " << p.degree();
    throw Error(ErrorCode::GridTooSmall, os.str());
  }
  return sample(p, grid);
}

GridStats grid_stats(const TrigPoly& p, std::size_t grid) {
  const auto values = sample(p, grid);
  GridStats st;
  st.grid = grid;
  std::size_t best = 0;
  double sum_abs = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double sq = std::norm(values[k]);
    const double a = std::sqrt(sq);
    sum_abs += a;
    sum_sq += sq;
    if (a > st.max_abs) {
      st.max_abs = a;
      best = k;
    }
  }
  const auto g = static_cast<double>(grid);
  st.argmax = kTwoPi * static_cast<double>(best) / g;
  st.mean_abs = sum_abs / g;
  st.mean_sq = sum_sq / g;
  return st;
}

std::size_t sup_grid_size(std::int64_t degree, int oversample) {
  if (oversample < 8) throw Error(ErrorCode::InvalidParam, "sup_norm oversample must be >= 8");
  return next_pow2(static_cast<std::size_t>(oversample) * static_cast<std::size_t>(degree + 1));
}

NormBracket sup_bracket_from_stats(const GridStats& stats, std::int64_t degree) {
  const double factor = 1.0 - std::numbers::pi * static_cast<double>(degree) /
                                  static_cast<double>(stats.grid);
  if (factor <= 0.0) throw Error(ErrorCode::GridTooSmall, "grid must exceed pi * degree");
  NormBracket b;
  b.lower = stats.max_abs;
  b.upper = degree == 0 ? stats.max_abs : stats.max_abs / factor;
  b.argmax = stats.argmax;
  b.grid = stats.grid;
  return b;
}

NormBracket sup_norm(const TrigPoly& p, int oversample) {
  const std::size_t grid = sup_grid_size(p.degree(), oversample);
  return sup_bracket_from_stats(grid_stats(p, grid), p.degree());
}

NormBracket l1_norm(const TrigPoly& p, std::size_t grid) {
  if (grid <= static_cast<std::size_t>(2 * p.degree()))
    throw Error(ErrorCode::GridTooSmall, "l1_norm grid must exceed twice the degree");
  const auto stats = grid_stats(p, grid);
  const double deg = static_cast<double>(p.degree());
  double sup_upper = 0.0;
  if (std::numbers::pi * deg / static_cast<double>(grid) <= 0.5)
    sup_upper = sup_bracket_from_stats(stats, p.degree()).upper;
  else
    sup_upper = sup_norm(p).upper;
  const double err = std::numbers::pi * deg * sup_upper / static_cast<double>(grid);
  NormBracket b;
  b.lower = std::max(0.0, stats.mean_abs - err);
  b.upper = stats.mean_abs + err;
  b.argmax = stats.argmax;
  b.grid = grid;
  return b;
}

double l2_norm(const TrigPoly& p) {
  double acc = 0.0;
  for (const auto& c : p.coeffs()) acc += std::norm(c);
  return std::sqrt(acc);
}

TrigPoly modulate(const TrigPoly& p, std::int64_t shift) {
  const auto c = p.coeffs();
  return TrigPoly(p.min_freq() + shift, std::vector<cplx>(c.begin(), c.end()), p.padded());
}

TrigPoly scale(const TrigPoly& p, cplx factor) {
  std::vector<cplx> c(p.coeffs().begin(), p.coeffs().end());
  for (auto& v : c) v *= factor;
  return TrigPoly(p.min_freq(), std::move(c), p.padded() || factor == cplx{});
}

TrigPoly negate(const TrigPoly& p) { return scale(p, -1.0); }

TrigPoly sum(std::span<const TrigPoly> ps) {
  if (ps.empty()) throw Error(ErrorCode::InvalidParam, "sum of an empty sequence");
  std::int64_t lo = ps.front().min_freq();
  std::int64_t hi = ps.front().max_freq();
  for (const auto& p : ps) {
    lo = std::min(lo, p.min_freq());
    hi = std::max(hi, p.max_freq());
  }
  std::vector<cplx> c(static_cast<std::size_t>(hi - lo + 1));
  for (const auto& p : ps) {
    const auto src = p.coeffs();
    const auto off = static_cast<std::size_t>(p.min_freq() - lo);
    for (std::size_t i = 0; i < src.size(); ++i) c[off + i] += src[i];
  }
  const bool padded = c.front() == cplx{} || c.back() == cplx{};
  return TrigPoly(lo, std::move(c), padded);
}

TrigPoly sum(const TrigPoly& a, const TrigPoly& b) {
  const TrigPoly both[] = {a, b};
  return sum(both);
}

double RealTrigPoly::operator()(double x) const {
  double acc = cos_coeffs.empty() ? 0.0 : cos_coeffs[0];
  for (std::size_t k = 1; k < cos_coeffs.size(); ++k) {
    const double ph = reduced_phase(static_cast<std::int64_t>(k), x);
    acc += cos_coeffs[k] * std::cos(ph) + sin_coeffs[k] * std::sin(ph);
  }
  return acc;
}

TrigPoly RealTrigPoly::to_complex() const {
  const std::int64_t deg = degree();
  std::vector<cplx> c(static_cast<std::size_t>(2 * deg + 1));
  c[static_cast<std::size_t>(deg)] = cos_coeffs[0];
  for (std::int64_t k = 1; k <= deg; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const cplx v{cos_coeffs[ku] / 2.0, -sin_coeffs[ku] / 2.0};
    c[static_cast<std::size_t>(deg + k)] = v;
    c[static_cast<std::size_t>(deg - k)] = std::conj(v);
  }
  return TrigPoly(-deg, std::move(c), true);
}

RealTrigPoly real_part(const TrigPoly& p) {
  const auto deg = static_cast<std::size_t>(p.degree());
  RealTrigPoly r;
  r.cos_coeffs.assign(deg + 1, 0.0);
  r.sin_coeffs.assign(deg + 1, 0.0);
  const auto c = p.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::int64_t s = p.min_freq() + static_cast<std::int64_t>(i);
    const auto k = static_cast<std::size_t>(std::abs(s));
    r.cos_coeffs[k] += c[i].real();
    if (s > 0) r.sin_coeffs[k] -= c[i].imag();
    if (s < 0) r.sin_coeffs[k] += c[i].imag();
  }
  return r;
}

}  // namespace lacuna
