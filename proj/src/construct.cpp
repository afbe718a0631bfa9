#include "lacuna/construct.hpp"

#include <cmath>
#include <sstream>

#include "fft.hpp"
#include "lacuna/error.hpp"
#include "lacuna/parallel.hpp"

namespace lacuna {

double ConstantProfile::beta() const {
  return beta_override.value_or(7.0 * std::sqrt(2.0 * c_H));
}

bool ConstantProfile::is_paper() const {
  return alpha == 316.0 && gamma == 210.0 && a_offset == 45.0 && a_slope == 30.0 &&
         !beta_override.has_value();
}

void ConstantProfile::validate() const {
  const double vals[] = {alpha, gamma, c_H, a_offset, a_slope, beta()};
  for (double v : vals)
    if (!std::isfinite(v) || v <= 0.0)
      throw Error(ErrorCode::InvalidParam, "all profile constants must be positive and finite");
}

Factorization RunState::factorization(std::size_t n) const {
  return {real_part(envelopes.at(n - 1)), records.at(n - 1).carrier};
}

double compute_a(std::size_t n, const FrequencyPlan& plan, const ConstantProfile& profile) {
  const Block& b = plan.block(n);
  const double ratio = static_cast<double>(b.m) / static_cast<double>(b.d_eff);
  return profile.a_offset + profile.a_slope * std::log(ratio) / std::log(plan.q);
}

double theorem_log_term(double q, std::int64_t m, std::int64_t d) {
  const double lq = std::log(q);
  const double inner = std::max({static_cast<double>(m) / static_cast<double>(d), 1.0 / lq, 1.0});
  return std::log(inner) / lq;
}

TrigPoly kernel_sum_envelope(std::int64_t d, std::span<const std::int64_t> lambda) {
  if (d < 1) throw Error(ErrorCode::InvalidParam, "lattice size must be >= 1");
  const std::int64_t h = (d - 1) / 2;
  const auto du = static_cast<std::size_t>(d);

  // Character sums over the complement: sum_{l in lambda} e^{-2 pi i k l / d}
  // = d [k = 0 mod d] - sum_{l not in lambda} e^{-2 pi i k l / d}. A full
  // lattice therefore gives exact zeros away from k = 0.
  std::vector<char> in_lambda(du, 0);
  for (std::int64_t l : lambda) {
    if (l < 1 || l > d) throw Error(ErrorCode::InvalidParam, "lattice index outside 1..d");
    in_lambda[static_cast<std::size_t>(l % d)] = 1;
  }
  std::int64_t count = 0;
  for (char c : in_lambda) count += c;
  std::vector<cplx> complement(du);
  bool any_missing = false;
  for (std::size_t r = 0; r < du; ++r)
    if (!in_lambda[r]) {
      complement[r] = 1.0;
      any_missing = true;
    }
  if (any_missing) detail::dft_forward(complement);

  const double dtilde = static_cast<double>(h + 1);
  std::vector<cplx> c(static_cast<std::size_t>(2 * h + 1));
  c[static_cast<std::size_t>(h)] = 0.5 * (static_cast<double>(count) / static_cast<double>(d));
  for (std::int64_t k = 1; k <= h; ++k) {
    const cplx chi = any_missing ? -complement[static_cast<std::size_t>(k)] : cplx{};
    const double weight = 0.5 * (1.0 - static_cast<double>(k) / dtilde);
    const cplx v = weight * (chi / static_cast<double>(d));
    c[static_cast<std::size_t>(h + k)] = v;
    c[static_cast<std::size_t>(h - k)] = std::conj(v);
  }
  return TrigPoly(-h, std::move(c), true);
}

namespace {

StepRecord base_record(const RunState& state, std::size_t n) {
  const Block& b = state.plan.block(n);
  StepRecord r;
  r.n = static_cast<std::int64_t>(n);
  r.m = b.m;
  r.d = b.d;
  r.d_eff = b.d_eff;
  r.a_n = compute_a(n, state.plan, state.profile);
  r.threshold = state.profile.beta() * std::sqrt(static_cast<double>(n));
  r.log_term = theorem_log_term(state.plan.q, b.m, b.d);
  return r;
}

void commit(RunState& state, StepRecord record, TrigPoly envelope, TrigPoly delta, StepArcs arcs) {
  TrigPoly partial = state.partial_sums.empty() ? delta : sum(state.partial_sums.back(), delta);
  state.envelopes.push_back(std::move(envelope));
  state.deltas.push_back(std::move(delta));
  state.partial_sums.push_back(std::move(partial));
  certify_norms(state, record);
  state.records.push_back(std::move(record));
  if (state.options.keep_arcs) state.arcs.push_back(std::move(arcs));
}

}  // namespace

void certify_norms(const RunState& state, StepRecord& record) {
  const auto n = static_cast<std::size_t>(record.n);
  const int osv = state.options.sup_oversample;
  // |delta_n| = |envelope_n| pointwise, so the envelope's smaller degree is
  // the one that enters the Bernstein factor.
  const TrigPoly& env = state.envelopes.at(n - 1);
  record.delta_sup = sup_norm(env, osv);
  record.delta_l1 = l1_norm(env, sup_grid_size(env.degree(), osv));

  const TrigPoly& s = state.partial_sum(n);
  const auto stats = grid_stats(s, sup_grid_size(s.degree(), osv));
  record.S_sup = sup_bracket_from_stats(stats, s.degree());
  record.S_l2 = l2_norm(s);
  record.S_l2_grid = std::sqrt(stats.mean_sq);
  record.S_coeff_l1 = s.coeff_l1();
}

RunState init(const FrequencyPlan& plan, const ConstantProfile& profile,
              const ConstructOptions& options) {
  if (!plan.reduced) throw Error(ErrorCode::InvalidParam, "plan must be width-reduced before construction");
  if (plan.blocks.empty()) throw Error(ErrorCode::EmptyPlan, "plan has no blocks");
  for (std::size_t j = 1; j <= plan.size(); ++j) {
    const Block& b = plan.block(j);
    if (!width_condition_holds(plan.q, b.m, b.d_eff) || b.d_eff > b.d)
      throw Error(ErrorCode::InvalidParam, "effective width violates the reduction condition",
                  static_cast<std::int64_t>(j));
  }
  profile.validate();

  RunState state;
  state.plan = plan;
  state.profile = profile;
  state.options = options;

  StepRecord r = base_record(state, 1);
  r.synthetic = true;
  r.half_width = 0;
  r.carrier = r.m;
  r.lambda.resize(static_cast<std::size_t>(r.d_eff));
  for (std::int64_t l = 1; l <= r.d_eff; ++l) r.lambda[static_cast<std::size_t>(l - 1)] = l;
  r.l1_num = 1;
  r.l1_den = 1;
  commit(state, std::move(r), TrigPoly::monomial(0), TrigPoly::monomial(plan.block(1).m), {});
  return state;
}

const StepRecord& step(RunState& state, const StepObserver& observer) {
  const std::size_t n = state.completed() + 1;
  if (n < 2 || n > state.plan.size())
    throw Error(ErrorCode::InvalidParam, "no block left to construct", static_cast<std::int64_t>(n));

  StepRecord r = base_record(state, n);
  StepArcs arcs;
  arcs.E.resize(n - 1);
  parallel_for(
      n - 1,
      [&](std::size_t i) {
        arcs.E[i] = superlevel_arcs(state.partial_sums[i], r.threshold, state.options.superlevel,
                                    state.records[i].S_sup.upper);
      },
      state.options.threads);
  r.E.reserve(n - 1);
  for (std::size_t i = 0; i < n - 1; ++i)
    r.E.push_back({static_cast<std::int64_t>(i + 1), arcs.E[i].measure(), arcs.E[i].components()});

  const double tol = state.options.superlevel.tol_x;
  arcs.B = unite(arcs.E, tol);
  r.B_measure = arcs.B.measure();
  r.B_components = arcs.B.components();

  const double limit = static_cast<double>(n) - r.a_n;
  r.used_j_max = limit >= 1.0 ? static_cast<std::int64_t>(std::floor(limit)) : 0;
  std::vector<ArcSet> grown;
  for (std::int64_t j = 1; j <= r.used_j_max; ++j) {
    const double gap = static_cast<double>(static_cast<std::int64_t>(n) - j);
    const double radius = kTwoPi * gap * gap / static_cast<double>(r.d_eff);
    grown.push_back(expand(arcs.E[static_cast<std::size_t>(j - 1)], radius, tol));
  }
  arcs.Btilde = unite(grown, tol);
  r.Btilde_measure = arcs.Btilde.measure();
  r.Btilde_components = arcs.Btilde.components();

  r.lambda = survivors(arcs.Btilde, r.d_eff, tol);
  if (r.lambda.empty()) {
    std::ostringstream os;
    os << "step " << n << ": no lattice point survives (mu B~ = " << r.Btilde_measure
       << ", Conn B~ = " << r.Btilde_components << ", d_eff = " << r.d_eff << ")";
    throw Error(ErrorCode::LambdaCollapse, os.str(), static_cast<std::int64_t>(n));
  }

  r.half_width = (r.d_eff - 1) / 2;
  r.carrier = r.m + r.half_width;
  r.l1_num = r.lambda_size();
  r.l1_den = 2 * r.d_eff;

  TrigPoly env = kernel_sum_envelope(r.d_eff, r.lambda);
  TrigPoly delta = modulate(env, r.carrier);
  commit(state, std::move(r), std::move(env), std::move(delta), arcs);
  if (observer) observer(state, state.records.back(), arcs);
  return state.records.back();
}

RunState run(const FrequencyPlan& plan, const ConstantProfile& profile, std::size_t steps,
             const StepObserver& observer, const ConstructOptions& options) {
  if (steps < 1 || steps > plan.size())
    throw Error(ErrorCode::InvalidParam, "step count must lie in [1, plan length]");
  RunState state = init(plan, profile, options);
  if (observer) observer(state, state.records.back(), StepArcs{});
  while (state.completed() < steps) step(state, observer);
  return state;
}

std::vector<std::int64_t> tau_profile(const RunState& state, std::size_t n,
                                      std::span<const double> xs) {
  if (n < 1 || n > state.completed())
    throw Error(ErrorCode::InvalidParam, "tau requested for an unconstructed step");
  const double level = state.profile.beta() * std::sqrt(static_cast<double>(n));
  std::vector<std::int64_t> tau(xs.size(), 0);
  parallel_for(
      xs.size(),
      [&](std::size_t i) {
        cplx acc{};
        for (std::size_t t = 1; t + 1 <= n; ++t) {
          acc += state.delta(t)(xs[i]);
          if (std::abs(acc) <= level) tau[i] = static_cast<std::int64_t>(t);
        }
      },
      state.options.threads);
  return tau;
}

}  // namespace lacuna
