#include "lacuna/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "lacuna/error.hpp"
#include "lacuna/parallel.hpp"

namespace lacuna {

namespace {

constexpr double kPi = std::numbers::pi;

Verdict make_verdict(std::string name, std::int64_t n, std::int64_t j, std::string claim,
                     double bound, double value, bool holds, bool guaranteed) {
  Verdict v;
  v.name = std::move(name);
  v.n = n;
  v.j = j;
  v.claim = std::move(claim);
  v.bound = bound;
  v.value = value;
  v.margin = (v.claim == "<=" || v.claim == "<") ? bound - value : value - bound;
  v.holds = holds;
  v.status = !guaranteed ? Status::Informational : (holds ? Status::Pass : Status::Fail);
  return v;
}

double slack_for(const TrigPoly& p) { return kPointwiseSlack * p.coeff_l1(); }

// |S_t(x)| and |delta_t(x)| for t = 1..N at every point.
struct PointTable {
  std::vector<std::vector<double>> abs_sum;    // [x][t-1]
  std::vector<std::vector<double>> abs_delta;  // [x][t-1]
};

PointTable tabulate(const RunState& state, std::span<const double> xs) {
  const std::size_t N = state.completed();
  PointTable tab;
  tab.abs_sum.assign(xs.size(), std::vector<double>(N));
  tab.abs_delta.assign(xs.size(), std::vector<double>(N));
  parallel_for(
      xs.size(),
      [&](std::size_t i) {
        cplx acc{};
        for (std::size_t t = 1; t <= N; ++t) {
          const cplx v = state.delta(t)(xs[i]);
          acc += v;
          tab.abs_delta[i][t - 1] = std::abs(v);
          tab.abs_sum[i][t - 1] = std::abs(acc);
        }
      },
      state.options.threads);
  return tab;
}

TailDiagnostics tail_from_table(const RunState& state, const PointTable& tab, std::size_t n) {
  TailDiagnostics diag;
  diag.n = static_cast<std::int64_t>(n);
  diag.points = tab.abs_sum.size();
  const double level = state.profile.beta() * std::sqrt(static_cast<double>(n));
  const double a = state.record(n).a_n;
  for (std::size_t i = 0; i < tab.abs_sum.size(); ++i) {
    std::int64_t tau = 0;
    for (std::size_t t = 1; t + 1 <= n; ++t)
      if (tab.abs_sum[i][t - 1] <= level) tau = static_cast<std::int64_t>(t);
    if (tau == 0) {
      ++diag.undefined_tau;
      continue;
    }
    if (!(static_cast<double>(tau) < static_cast<double>(n) - a)) continue;
    const auto t_first = static_cast<std::int64_t>(std::ceil(static_cast<double>(tau) + a + 1.0));
    double tail = 0.0;
    bool any = false;
    for (std::int64_t t = t_first; t <= static_cast<std::int64_t>(n); ++t) {
      const double s = static_cast<double>(t - tau - 1);
      const double value = tab.abs_delta[i][static_cast<std::size_t>(t - 1)];
      const double tol = slack_for(state.delta(static_cast<std::size_t>(t)));
      const double excess = value - 2.0 / (s * s);
      diag.max_excess = diag.checked_pairs == 0 ? excess : std::max(diag.max_excess, excess);
      if (excess > tol) diag.holds = false;
      tail += value;
      any = true;
      ++diag.checked_pairs;
    }
    if (any) {
      diag.vacuous = false;
      ++diag.checked_points;
      diag.max_tail_sum = std::max(diag.max_tail_sum, tail);
      if (a > 3.0 && tail >= 1.0 + kPointwiseSlack * std::max(1.0, tail)) diag.holds = false;
    }
  }
  return diag;
}

std::vector<double> tail_points(std::size_t count) {
  std::vector<double> xs(count);
  for (std::size_t k = 0; k < count; ++k)
    xs[k] = kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
  return xs;
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Informational: return "informational";
  }
  return "fail";
}

Status status_from_name(std::string_view s) {
  if (s == "pass") return Status::Pass;
  if (s == "fail") return Status::Fail;
  if (s == "informational") return Status::Informational;
  throw Error(ErrorCode::Format, "unknown verdict status '" + std::string(s) + "'");
}

std::vector<Verdict> check_blocks(const RunState& state) {
  const bool paper = state.profile.is_paper();
  std::vector<Verdict> out;
  for (std::size_t n = 1; n <= state.completed(); ++n) {
    const StepRecord& r = state.record(n);
    const TrigPoly& delta = state.delta(n);
    const auto nn = static_cast<std::int64_t>(n);
    const double slack = slack_for(delta);

    const std::int64_t top = r.m + r.d_eff - 1;
    const bool inside = delta.min_freq() >= r.m && delta.max_freq() <= top;
    Verdict spec = make_verdict("spectrum", nn, 0, "<=", static_cast<double>(top),
                                static_cast<double>(delta.max_freq()), inside, true);
    spec.margin = static_cast<double>(std::min(delta.min_freq() - r.m, top - delta.max_freq()));
    out.push_back(spec);

    const double exact = r.delta_l1_exact();
    const double dc = std::abs(state.envelopes[n - 1].coeff(0));
    const double dc_err = std::abs(dc - exact);
    const bool identity = dc_err <= 1e-15 && r.delta_l1.contains(exact, slack);
    out.push_back(make_verdict("l1_identity", nn, 0, "<=", 1e-15, dc_err, identity, true));

    out.push_back(make_verdict("l1_lower", nn, 0, ">=", 0.125, exact, 8 * r.l1_num >= r.l1_den, paper));

    const double sup_safe = r.delta_sup.upper + slack;
    out.push_back(make_verdict("sup_upper", nn, 0, "<=", 7.0, sup_safe, sup_safe <= 7.0, paper));

    out.push_back(make_verdict("l1_le_sup", nn, 0, "<=", sup_safe, exact, exact <= sup_safe, true));
  }
  return out;
}

double theorem_rhs(const RunState& state, std::size_t N) {
  double log_max = 0.0;
  for (std::size_t j = 1; j <= N; ++j) log_max = std::max(log_max, state.record(j).log_term);
  const ConstantProfile& p = state.profile;
  return p.alpha + p.beta() * std::sqrt(static_cast<double>(N)) + p.gamma * log_max;
}

Verdict check_theorem_bound(const RunState& state, std::size_t N) {
  if (N < 1 || N > state.completed())
    throw Error(ErrorCode::InvalidParam, "theorem bound requested beyond the run");
  const double rhs = theorem_rhs(state, N);
  const double lhs = state.record(N).S_sup.upper + slack_for(state.partial_sum(N));
  return make_verdict("theorem_bound", static_cast<std::int64_t>(N), 0, "<=", rhs, lhs, lhs <= rhs,
                      state.profile.is_paper());
}

std::vector<Verdict> check_intermediate(const RunState& state) {
  const bool paper = state.profile.is_paper();
  std::vector<Verdict> out;
  for (std::size_t n = 2; n <= state.completed(); ++n) {
    const StepRecord& r = state.record(n);
    const auto nn = static_cast<std::int64_t>(n);
    out.push_back(make_verdict("mu_B", nn, 0, "<", kPi, r.B_measure, r.B_measure < kPi, paper));

    std::int64_t worst_j = 0;
    double worst_ratio = -1.0;
    for (const auto& e : r.E) {
      const double ratio = static_cast<double>(e.components) /
                           (4.0 * static_cast<double>(state.plan.block(static_cast<std::size_t>(e.j)).m));
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst_j = e.j;
      }
    }
    if (worst_j > 0) {
      const auto& e = r.E[static_cast<std::size_t>(worst_j - 1)];
      const auto bound = static_cast<double>(4 * state.plan.block(static_cast<std::size_t>(worst_j)).m);
      out.push_back(make_verdict("conn_E", nn, worst_j, "<", bound, static_cast<double>(e.components),
                                 static_cast<double>(e.components) < bound, paper));
    }

    const double conn_bound = static_cast<double>(r.d_eff) / 8.0;
    out.push_back(make_verdict("conn_Btilde", nn, 0, "<", conn_bound,
                               static_cast<double>(r.Btilde_components),
                               8 * static_cast<std::int64_t>(r.Btilde_components) < r.d_eff, paper));
    out.push_back(make_verdict("mu_Btilde", nn, 0, "<", 1.25 * kPi, r.Btilde_measure,
                               r.Btilde_measure < 1.25 * kPi, paper));
    out.push_back(make_verdict("lambda_size", nn, 0, ">", static_cast<double>(r.d_eff) / 4.0,
                               static_cast<double>(r.lambda_size()), 4 * r.lambda_size() > r.d_eff, paper));
  }
  return out;
}

std::vector<Verdict> check_parseval(const RunState& state) {
  std::vector<Verdict> out;
  for (std::size_t n = 1; n <= state.completed(); ++n) {
    const StepRecord& r = state.record(n);
    const double rel = std::abs(r.S_l2 - r.S_l2_grid) / std::max(r.S_l2, 1e-300);
    out.push_back(make_verdict("parseval", static_cast<std::int64_t>(n), 0, "<=", 1e-9, rel, rel <= 1e-9, true));
  }
  return out;
}

namespace {

std::size_t majorant_grid(const RunState& state, std::size_t upto) {
  const std::int64_t deg = state.partial_sum(upto).degree();
  return next_pow2(4 * static_cast<std::size_t>(deg + 1));
}

MajorantStats finish_majorant(const RunState& state, std::size_t n, std::size_t grid, double star_sq) {
  MajorantStats st;
  st.n = static_cast<std::int64_t>(n);
  st.grid = grid;
  st.S_star_l2sq = star_sq;
  const double l2 = state.record(n - 1).S_l2;
  st.S_l2sq = l2 * l2;
  st.ratio = st.S_star_l2sq / st.S_l2sq;
  st.mu_B = state.record(n).B_measure;
  const double beta = state.profile.beta();
  st.chebyshev_bound = kTwoPi * st.S_star_l2sq / (beta * beta * static_cast<double>(n));
  st.holds = st.mu_B <= st.chebyshev_bound * (1.0 + kMeasureRelTol);
  return st;
}

}  // namespace

MajorantStats majorant_check(const RunState& state, std::size_t n) {
  if (n < 2 || n > state.completed())
    throw Error(ErrorCode::InvalidParam, "majorant check needs 2 <= n <= completed steps");
  const std::size_t grid = majorant_grid(state, n - 1);
  std::vector<double> running(grid, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const auto v = sample(state.partial_sum(j), grid);
    for (std::size_t k = 0; k < grid; ++k) running[k] = std::max(running[k], std::norm(v[k]));
  }
  double acc = 0.0;
  for (double r : running) acc += r;
  return finish_majorant(state, n, grid, acc / static_cast<double>(grid));
}

std::vector<MajorantStats> majorant_sweep(const RunState& state) {
  std::vector<MajorantStats> out;
  const std::size_t N = state.completed();
  if (N < 2) return out;
  const std::size_t grid = majorant_grid(state, N - 1);
  std::vector<double> running(grid, 0.0);
  for (std::size_t j = 1; j < N; ++j) {
    {
      const auto v = sample(state.partial_sum(j), grid);
      for (std::size_t k = 0; k < grid; ++k) running[k] = std::max(running[k], std::norm(v[k]));
    }
    double acc = 0.0;
    for (double r : running) acc += r;
    out.push_back(finish_majorant(state, j + 1, grid, acc / static_cast<double>(grid)));
  }
  return out;
}

SeriesIdentity series_identity(double q, std::int64_t a) {
  if (!(q > 1.0) || !std::isfinite(q)) throw Error(ErrorCode::DivergentInput, "series needs q > 1");
  if (a < 0) throw Error(ErrorCode::InvalidParam, "series start must be >= 0");
  const long double ql = q;
  const long double al = static_cast<long double>(a);
  const long double lead = std::pow(ql, 3.0L - al) / std::pow(ql - 1.0L, 3.0L);
  const long double poly =
      al * al + (1.0L + 2.0L * al - 2.0L * al * al) / ql + (al - 1.0L) * (al - 1.0L) / (ql * ql);

  SeriesIdentity out;
  out.closed_form = static_cast<double>(lead * poly);
  if (a >= 1) out.bound = static_cast<double>(2.0L * al * al * lead);

  // Partial sums until the geometric tail bound falls below 1e-13 of the sum.
  const long double decay_start = 2.0L / std::log(ql);
  long double partial = 0.0L;
  std::int64_t s = a;
  for (;; ++s) {
    const long double sl = static_cast<long double>(s);
    const long double term = sl * sl * std::pow(ql, -sl);
    partial += term;
    if (s >= 1 && sl >= decay_start) {
      const long double r = ((sl + 1.0L) / sl) * ((sl + 1.0L) / sl) / ql;
      if (r < 1.0L && term * r / (1.0L - r) < 1e-13L * partial) break;
    }
    if (s - a > 10'000'000) throw Error(ErrorCode::DivergentInput, "series oracle did not converge");
  }
  out.terms = s - a + 1;
  out.oracle_diff = static_cast<double>(std::abs(lead * poly - partial));
  return out;
}

TailDiagnostics tail_bound_check(const RunState& state, std::size_t n, std::span<const double> xs) {
  if (n < 1 || n > state.completed())
    throw Error(ErrorCode::InvalidParam, "tail check requested for an unconstructed step");
  return tail_from_table(state, tabulate(state, xs), n);
}

VerificationReport verify_run(const RunState& state, const VerifyOptions& options) {
  VerificationReport rep;
  rep.paper_profile = state.profile.is_paper();

  auto append = [&rep](std::vector<Verdict> vs) {
    rep.verdicts.insert(rep.verdicts.end(), std::make_move_iterator(vs.begin()),
                        std::make_move_iterator(vs.end()));
  };
  append(check_blocks(state));
  rep.theorem_pass = true;
  for (std::size_t N = 1; N <= state.completed(); ++N) {
    Verdict v = check_theorem_bound(state, N);
    rep.theorem_pass = rep.theorem_pass && v.holds;
    rep.verdicts.push_back(std::move(v));
  }
  append(check_intermediate(state));
  append(check_parseval(state));

  if (options.majorant) {
    rep.majorant = majorant_sweep(state);
    for (const auto& m : rep.majorant)
      rep.verdicts.push_back(make_verdict("chebyshev", m.n, 0, "<=",
                                          m.chebyshev_bound * (1.0 + kMeasureRelTol), m.mu_B, m.holds, true));
  }

  if (options.tail_points > 0) {
    const auto xs = tail_points(options.tail_points);
    const auto table = tabulate(state, xs);
    for (std::size_t n = 2; n <= state.completed(); ++n) {
      TailDiagnostics d = tail_from_table(state, table, n);
      rep.verdicts.push_back(make_verdict("tail_bound", static_cast<std::int64_t>(n), 0, "<=", 0.0,
                                          d.vacuous ? 0.0 : d.max_excess, d.holds, rep.paper_profile));
      rep.tail.push_back(d);
    }
  }

  rep.all_pass = std::none_of(rep.verdicts.begin(), rep.verdicts.end(),
                              [](const Verdict& v) { return v.status == Status::Fail; });

  const ConstantProfile& p = state.profile;
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  rep.settings = {
      {"q", num(state.plan.q)},
      {"steps", std::to_string(state.completed())},
      {"alpha", num(p.alpha)},
      {"beta", num(p.beta())},
      {"gamma", num(p.gamma)},
      {"c_H", num(p.c_H)},
      {"a_offset", num(p.a_offset)},
      {"a_slope", num(p.a_slope)},
      {"sup_oversample", std::to_string(state.options.sup_oversample)},
      {"superlevel_oversample", std::to_string(state.options.superlevel.oversample)},
      {"superlevel_mode", state.options.superlevel.refine ? "refined" : "conservative"},
  };
  rep.notes.push_back(
      "effective widths use d_eff = min(d, floor(m ln q)) when ln q < 1; the theorem bound uses the given widths");
  rep.notes.push_back("c_H = " + num(p.c_H) + " is a placeholder; beta = " + num(p.beta()));
  if (!rep.paper_profile)
    rep.notes.push_back("non-reference constant profile: guarantee checks are informational");
  for (const auto& w : state.plan.warnings) rep.notes.push_back("plan: " + w);
  return rep;
}

std::string format_report(const VerificationReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"check", "n", "j", "claim", "bound", "value", "margin", "status"});
  for (const auto& v : report.verdicts)
    rows.push_back({v.name, std::to_string(v.n), v.j ? std::to_string(v.j) : "-", v.claim,
                    fmt_num(v.bound), fmt_num(v.value), fmt_num(v.margin), std::string(status_name(v.status))});
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream os;
  for (const auto& [k, v] : report.settings) os << k << " = " << v << '\n';
  for (const auto& note : report.notes) os << "note: " << note << '\n';
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << row[c];
      if (c + 1 < row.size()) os << std::string(width[c] - row[c].size() + 2, ' ');
    }
    os << '\n';
  }
  os << "\ntheorem bound: " << (report.theorem_pass ? "holds" : "violated") << '\n';
  os << "verdict: " << (report.all_pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace lacuna
