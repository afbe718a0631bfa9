#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace lacuna {

using cplx = std::complex<double>;

// Sum of c_s e^{isx} over a contiguous frequency range
// [min_freq, min_freq + size). Zero end coefficients are only allowed when
// the polynomial is marked padded.
class TrigPoly {
 public:
  TrigPoly(std::int64_t min_freq, std::vector<cplx> coeffs, bool padded = false);

  static TrigPoly monomial(std::int64_t freq, cplx value = 1.0);
  static TrigPoly zero();

  std::int64_t min_freq() const noexcept { return min_freq_; }
  std::int64_t max_freq() const noexcept {
    return min_freq_ + static_cast<std::int64_t>(coeffs_.size()) - 1;
  }
  std::size_t size() const noexcept { return coeffs_.size(); }
  bool padded() const noexcept { return padded_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  // Coefficient at frequency s, zero outside the stored range.
  cplx coeff(std::int64_t s) const noexcept;

  // max(|min_freq|, |max_freq|); the degree used by every certified bound.
  std::int64_t degree() const noexcept;

  // Sum of |c_s|; scales the round-off slack of grid bounds.
  double coeff_l1() const noexcept;

  // Direct O(size) evaluation at an arbitrary point.
  cplx operator()(double x) const;

  // Same polynomial with zero end coefficients dropped (zero stays padded).
  TrigPoly trimmed() const;

  friend bool operator==(const TrigPoly&, const TrigPoly&) = default;

 private:
  std::int64_t min_freq_;
  std::vector<cplx> coeffs_;
  bool padded_;
};

struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;
  double argmax = 0.0;     // grid point attaining `lower` (sup brackets only)
  std::size_t grid = 0;    // grid size used

  bool contains(double v, double slack = 0.0) const noexcept {
    return lower - slack <= v && v <= upper + slack;
  }
};

// Fejér kernel with the normalization (2/(d+1)) (sin((d+1)x/2) / (2 sin(x/2)))^2:
// coefficients (1 - |k|/(d+1)) / 2 for |k| <= d.
TrigPoly fejer(std::int64_t d);

// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

// Samples at x_k = 2 pi k / G. Requires G > 2 degree(p).
std::vector<cplx> grid_eval(const TrigPoly& p, std::size_t grid);

// Exact samples for any G >= 1: coefficients are folded modulo G first, so
// frequencies that alias still evaluate correctly on the grid itself.
std::vector<cplx> sample(const TrigPoly& p, std::size_t grid);

// Summary of |p| on a grid, computed without keeping the samples.
struct GridStats {
  std::size_t grid = 0;
  double max_abs = 0.0;
  double argmax = 0.0;
  double mean_abs = 0.0;
  double mean_sq = 0.0;
};

GridStats grid_stats(const TrigPoly& p, std::size_t grid);

// Grid size used by sup_norm for a given degree.
std::size_t sup_grid_size(std::int64_t degree, int oversample);

// Bernstein-certified bracket: upper = grid max / (1 - pi deg / G).
NormBracket sup_norm(const TrigPoly& p, int oversample = 16);
NormBracket sup_bracket_from_stats(const GridStats& stats, std::int64_t degree);

// Normalized L1 norm by the periodic rectangle rule, error pi deg sup / G.
NormBracket l1_norm(const TrigPoly& p, std::size_t grid);

// Normalized L2 norm, exact by Parseval.
double l2_norm(const TrigPoly& p);

TrigPoly modulate(const TrigPoly& p, std::int64_t shift);
TrigPoly negate(const TrigPoly& p);
TrigPoly scale(const TrigPoly& p, cplx factor);
TrigPoly sum(std::span<const TrigPoly> ps);
TrigPoly sum(const TrigPoly& a, const TrigPoly& b);

// Real trigonometric polynomial a_0 + sum_k (a_k cos kx + b_k sin kx).
struct RealTrigPoly {
  std::vector<double> cos_coeffs;  // a_0 .. a_deg
  std::vector<double> sin_coeffs;  // b_0 (always 0) .. b_deg

  std::int64_t degree() const noexcept {
    return static_cast<std::int64_t>(cos_coeffs.size()) - 1;
  }
  double operator()(double x) const;
  // Hermitian complex form on frequencies -deg..deg.
  TrigPoly to_complex() const;
};

RealTrigPoly real_part(const TrigPoly& p);

// p = e^{i carrier x} envelope(x) with a real envelope; then
// Re p(x) = envelope(x) cos(carrier x).
struct Factorization {
  RealTrigPoly envelope;
  std::int64_t carrier = 0;
};

}  // namespace lacuna
