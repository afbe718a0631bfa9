#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lacuna/construct.hpp"

namespace lacuna {

// Informational: the check ran under a non-reference constant profile, where
// no guarantee applies; the numbers are still recorded.
enum class Status { Pass, Fail, Informational };

std::string_view status_name(Status s);
Status status_from_name(std::string_view s);

struct Verdict {
  std::string name;
  std::int64_t n = 0;  // step or N; 0 when global
  std::int64_t j = 0;  // partial-sum index when relevant
  std::string claim;   // e.g. "<=", "<", ">=", ">"
  double bound = 0.0;
  double value = 0.0;  // inequality-safe side of the computed quantity
  double margin = 0.0; // positive when the claim holds
  bool holds = false;
  Status status = Status::Fail;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct MajorantStats {
  std::int64_t n = 0;
  std::size_t grid = 0;
  double S_star_l2sq = 0.0;  // ||max_{j<n} |S_j| ||_2^2 by grid quadrature
  double S_l2sq = 0.0;       // ||S_{n-1}||_2^2 from coefficients
  double ratio = 0.0;        // empirical lower witness for the majorant constant
  double mu_B = 0.0;
  double chebyshev_bound = 0.0;  // 2 pi ||S*||_2^2 / (beta^2 n)
  bool holds = false;            // mu_B <= bound (1 + 1e-6)

  friend bool operator==(const MajorantStats&, const MajorantStats&) = default;
};

struct SeriesIdentity {
  double closed_form = 0.0;
  std::optional<double> bound;  // only for a >= 1
  double oracle_diff = 0.0;
  std::int64_t terms = 0;
};

struct TailDiagnostics {
  std::int64_t n = 0;
  std::size_t points = 0;
  std::size_t undefined_tau = 0;  // points where no t qualifies (tau reported as 0)
  std::size_t checked_points = 0;
  std::size_t checked_pairs = 0;
  bool vacuous = true;
  double max_excess = 0.0;    // max |delta_t(x)| - 2/(t - tau - 1)^2
  double max_tail_sum = 0.0;  // max over x of sum_t |delta_t(x)|
  bool holds = true;

  friend bool operator==(const TailDiagnostics&, const TailDiagnostics&) = default;
};

struct VerificationReport {
  std::vector<Verdict> verdicts;
  std::vector<MajorantStats> majorant;
  std::vector<TailDiagnostics> tail;
  bool paper_profile = true;
  bool theorem_pass = false;
  bool all_pass = false;
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<std::string> notes;

  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

inline constexpr double kPointwiseSlack = 1e-9;  // times the coefficient L1 mass
inline constexpr double kMeasureRelTol = 1e-6;

std::vector<Verdict> check_blocks(const RunState& state);
Verdict check_theorem_bound(const RunState& state, std::size_t N);
double theorem_rhs(const RunState& state, std::size_t N);
std::vector<Verdict> check_intermediate(const RunState& state);
std::vector<Verdict> check_parseval(const RunState& state);

MajorantStats majorant_check(const RunState& state, std::size_t n);
// All n = 2..completed on one common grid.
std::vector<MajorantStats> majorant_sweep(const RunState& state);

SeriesIdentity series_identity(double q, std::int64_t a);

TailDiagnostics tail_bound_check(const RunState& state, std::size_t n, std::span<const double> xs);

struct VerifyOptions {
  bool majorant = true;
  std::size_t tail_points = 64;
};

VerificationReport verify_run(const RunState& state, const VerifyOptions& options = {});

// Aligned text table.
std::string format_report(const VerificationReport& report);

}  // namespace lacuna
