#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "lacuna/construct.hpp"
#include "lacuna/error.hpp"
#include "lacuna/io.hpp"
#include "lacuna/parallel.hpp"
#include "oracles.hpp"

using namespace lacuna;
using Pairs = std::vector<std::pair<std::int64_t, std::int64_t>>;

namespace {

ConstantProfile stress_profile() {
  ConstantProfile p;
  p.beta_override = 0.5;
  p.a_offset = 2.0;
  p.a_slope = 3.0;
  return p;
}

FrequencyPlan stress_plan(int n = 40) {
  return preset("geometric", {{"N", static_cast<double>(n)}, {"q", 1.3}, {"m1", 50}});
}

// Steps until the plan ends or the survivor set collapses.
RunState run_until_collapse(const FrequencyPlan& plan, const ConstantProfile& profile, ConstructOptions opts = {}) {
  RunState st = init(reduce_widths(plan), profile, opts);
  while (st.completed() < st.plan.size()) {
    try {
      step(st);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LambdaCollapse) throw;
      break;
    }
  }
  return st;
}

}  // namespace

TEST_CASE("init places a unit exponential at m_1") {
  const RunState st = init(reduce_widths(preset("dyadic", {{"N", 3}})), ConstantProfile{});
  REQUIRE(st.completed() == 1);
  const TrigPoly& d1 = st.delta(1);
  CHECK(d1.min_freq() == 4);
  REQUIRE(d1.size() == 1);
  CHECK(d1.coeffs()[0] == cplx(1.0, 0.0));
  const StepRecord& r = st.record(1);
  CHECK(r.synthetic);
  CHECK(r.lambda_size() == r.d_eff);
  CHECK(r.delta_l1_exact() == 1.0);
  CHECK(r.delta_l1.contains(1.0, 1e-12));
  CHECK(r.delta_sup.contains(1.0, 1e-12));
  CHECK(r.delta_sup.upper <= 7.0);
  CHECK(st.partial_sum(1) == d1);
}

TEST_CASE("init refuses an unreduced plan") {
  CHECK_THROWS_AS(init(preset("dyadic", {{"N", 3}}), ConstantProfile{}), Error);
}

TEST_CASE("compute_a examples") {
  const ConstantProfile paper;
  const FrequencyPlan ratio2 = reduce_widths(validate(2.0, Pairs{{4, 2}, {8, 1}}));
  CHECK(compute_a(1, ratio2, paper) == doctest::Approx(75.0).epsilon(1e-15));
  const FrequencyPlan ratio1 = validate(2.0, Pairs{{4, 4}, {8, 1}});
  CHECK(compute_a(1, ratio1, paper) == 45.0);
  ConstantProfile test;
  test.a_offset = 2.0;
  test.a_slope = 3.0;
  const FrequencyPlan ratio4 = reduce_widths(validate(2.0, Pairs{{8, 2}, {16, 1}}));
  CHECK(compute_a(1, ratio4, test) == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("a_n >= 2 / ln q under the paper profile for reduced plans") {
  for (double q : {1.05, 1.3, 2.0, 5.0}) {
    const FrequencyPlan p = reduce_widths(preset("geometric", {{"N", 18}, {"q", q}, {"m1", 100}}));
    for (std::size_t n = 1; n <= p.size(); ++n) CHECK(compute_a(n, p, ConstantProfile{}) >= 2.0 / std::log(q));
  }
}

TEST_CASE("paper-profile dyadic step 2 collapses to one half times an exponential") {
  RunState st = init(reduce_widths(preset("dyadic", {{"N", 4}})), ConstantProfile{});
  const StepRecord& r = step(st);
  CHECK(r.B_measure == 0.0);
  CHECK(r.Btilde_measure == 0.0);
  CHECK(r.lambda_size() == r.d_eff);
  const TrigPoly d2 = st.delta(2).trimmed();
  REQUIRE(d2.size() == 1);
  CHECK(d2.min_freq() == r.m + (r.d_eff - 1) / 2);
  CHECK(d2.coeffs()[0] == cplx(0.5, 0.0));

  std::vector<std::int64_t> full(static_cast<std::size_t>(r.d_eff));
  for (std::int64_t l = 1; l <= r.d_eff; ++l) full[static_cast<std::size_t>(l - 1)] = l;
  const auto brute = oracle::kernel_sum_brute(r.d_eff, full);
  for (std::size_t k = 0; k < brute.size(); ++k)
    CHECK(std::abs(brute[k] - st.envelopes[1].coeffs()[k]) < 1e-15);
}

TEST_CASE("kernel sum with a single lattice point of width one") {
  const TrigPoly e = kernel_sum_envelope(1, std::vector<std::int64_t>{1});
  REQUIRE(e.size() == 1);
  CHECK(e.min_freq() == 0);
  CHECK(e.coeffs()[0] == cplx(0.5));
}

TEST_CASE("kernel sum coefficients match the brute-force double sum") {
  std::mt19937_64 rng(4242);
  for (std::int64_t d : {2, 3, 7, 16, 45, 128, 301}) {
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<std::int64_t> lambda;
      std::bernoulli_distribution keep(trial == 0 ? 1.0 : 0.2 + 0.15 * trial);
      for (std::int64_t l = 1; l <= d; ++l)
        if (keep(rng)) lambda.push_back(l);
      if (lambda.empty()) lambda.push_back(d);
      const TrigPoly env = kernel_sum_envelope(d, lambda);
      const auto brute = oracle::kernel_sum_brute(d, lambda);
      REQUIRE(env.size() == brute.size());
      for (std::size_t k = 0; k < brute.size(); ++k) CHECK(std::abs(env.coeffs()[k] - brute[k]) < 1e-14);
      // real and nonnegative envelope
      for (const cplx& z : grid_eval(env, sup_grid_size(env.degree(), 16))) {
        CHECK(std::abs(z.imag()) < 1e-13);
        CHECK(z.real() >= -1e-13);
      }
    }
  }
}

TEST_CASE("survivors exclude exactly the lattice points inside the expanded bad set") {
  // An inflated first partial sum whose superlevel set is a pair of arcs.
  const FrequencyPlan plan = reduce_widths(validate(2.0, Pairs{{64, 64}, {128, 128}, {256, 1}}));
  ConstantProfile prof;
  prof.beta_override = 2.0;
  prof.a_offset = 0.5;
  prof.a_slope = 0.1;
  RunState st = init(plan, prof);
  const TrigPoly bump = sum(TrigPoly::monomial(64, 2.0), TrigPoly::monomial(66, 2.0));  // |S_1| = 4|cos x|
  st.partial_sums[0] = bump;
  st.deltas[0] = bump;
  st.records[0].S_sup = sup_norm(bump, 16);
  const StepRecord& r = step(st);
  REQUIRE(r.used_j_max == 1);

  const double theta = 2.0 * std::sqrt(2.0);
  const ArcSet E = superlevel_arcs(bump, theta);
  CHECK(E.components() == 2);
  const double radius = kTwoPi / static_cast<double>(r.d_eff);
  std::set<std::int64_t> got(r.lambda.begin(), r.lambda.end());
  std::size_t excluded = 0;
  for (std::int64_t l = 1; l <= r.d_eff; ++l) {
    const double x = lattice_point(l, r.d_eff);
    bool inside = false;
    for (const Arc& a : E.arcs()) {
      double off = std::fmod(x - (a.start - radius), kTwoPi);
      if (off < 0) off += kTwoPi;
      inside = inside || off <= a.length() + 2 * radius + 1e-12;
    }
    CHECK(got.count(l) == (inside ? 0u : 1u));
    excluded += inside;
  }
  CHECK(excluded > 0);
  // exact survivors: |true superlevel| = {|cos x| > 1/sqrt 2} excludes points near 0 and pi
  CHECK(got.count(r.d_eff) == 0);
  CHECK(got.count(r.d_eff / 4) == 1);
}

TEST_CASE("run on the dyadic paper profile, three steps") {
  const RunState st = run(reduce_widths(preset("dyadic", {{"N", 3}})), ConstantProfile{}, 3);
  const TrigPoly s3 = st.partial_sum(3);
  std::vector<std::int64_t> support;
  for (std::int64_t s = s3.min_freq(); s <= s3.max_freq(); ++s)
    if (s3.coeff(s) != cplx(0.0)) support.push_back(s);
  const std::int64_t M2 = 8 + (st.record(2).d_eff - 1) / 2, M3 = 16 + (st.record(3).d_eff - 1) / 2;
  CHECK(support == std::vector<std::int64_t>{4, M2, M3});
  CHECK(s3.coeff(4) == cplx(1.0));
  CHECK(s3.coeff(M2) == cplx(0.5));
  CHECK(s3.coeff(M3) == cplx(0.5));
  CHECK(st.record(3).S_sup.contains(2.0, 1e-9 * s3.coeff_l1()));
}

TEST_CASE("run with one step returns delta_1 only") {
  int calls = 0;
  const RunState st = run(reduce_widths(preset("dyadic", {{"N", 5}})), ConstantProfile{}, 1,
                          [&](const RunState&, const StepRecord&, const StepArcs&) { ++calls; });
  CHECK(st.completed() == 1);
  CHECK(calls == 1);
}

TEST_CASE("identical inputs give bit-identical coefficients") {
  const FrequencyPlan plan = stress_plan(18);
  ConstructOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const RunState a = run(reduce_widths(plan), stress_profile(), 18, {}, one);
  const RunState b = run(reduce_widths(plan), stress_profile(), 18, {}, many);
  for (std::size_t n = 1; n <= 18; ++n) {
    CHECK(encode_lacf(a.delta(n)) == encode_lacf(b.delta(n)));
    CHECK(dump_json(record_to_json(a.record(n))) == dump_json(record_to_json(b.record(n))));
  }
}

TEST_CASE("tau profile") {
  SUBCASE("all partial sums below the level give n - 1") {
    const RunState st = run(reduce_widths(preset("dyadic", {{"N", 6}})), ConstantProfile{}, 6);
    const std::vector<double> xs{0.0, 0.5, 3.0};
    for (auto t : tau_profile(st, 6, xs)) CHECK(t == 5);
  }
  SUBCASE("n = 2 with a unimodular first sum") {
    const RunState st = run(reduce_widths(preset("dyadic", {{"N", 2}})), ConstantProfile{}, 2);
    const std::vector<double> xs{0.1, 1.0, 2.0, 6.0};
    for (auto t : tau_profile(st, 2, xs)) CHECK(t == 1);
  }
  SUBCASE("a large fifth block stops tau at 4") {
    RunState st;
    st.profile.beta_override = 1.0;
    for (int t = 1; t <= 8; ++t) {
      st.deltas.push_back(t == 5 ? TrigPoly::monomial(0, 10.0) : TrigPoly::monomial(t, 0.1));
      st.partial_sums.push_back(st.partial_sums.empty() ? st.deltas.back() : sum(st.partial_sums.back(), st.deltas.back()));
    }
    const std::vector<double> xs{0.0, 1.7};
    // direct scan oracle
    for (double x : xs) {
      std::int64_t expect = 0;
      cplx acc{};
      for (int t = 1; t <= 7; ++t) {
        acc += st.deltas[static_cast<std::size_t>(t - 1)](x);
        if (std::abs(acc) <= std::sqrt(8.0)) expect = t;
      }
      CHECK(expect == 4);
    }
    for (auto t : tau_profile(st, 8, xs)) CHECK(t == 4);
  }
}

TEST_CASE("stress profile: block invariants on every emitted step") {
  const RunState st = run_until_collapse(stress_plan(), stress_profile());
  REQUIRE(st.completed() >= 10);
  bool any_bad = false, any_proper = false;
  for (std::size_t n = 1; n <= st.completed(); ++n) {
    const StepRecord& r = st.record(n);
    const TrigPoly& d = st.delta(n);
    CHECK(d.min_freq() >= r.m);
    CHECK(d.max_freq() < r.m + r.d_eff);
    CHECK(std::abs(st.envelopes[n - 1].coeff(0).real() - r.delta_l1_exact()) <= 1e-15);
    CHECK(r.delta_l1.contains(r.delta_l1_exact(), 1e-9 * d.coeff_l1()));
    CHECK(r.delta_sup.upper < 7.0);
    for (const auto& e : r.E) any_bad = any_bad || e.measure > 0.0;
    any_proper = any_proper || r.lambda_size() < r.d_eff;
    // partial sums are coefficient-exact sums
    if (n >= 2) {
      const TrigPoly& prev = st.partial_sum(n - 1);
      const TrigPoly& cur = st.partial_sum(n);
      for (std::int64_t s = cur.min_freq(); s <= cur.max_freq(); ++s)
        CHECK(cur.coeff(s) == prev.coeff(s) + d.coeff(s));
    }
  }
  CHECK(any_bad);
  CHECK(any_proper);
}

TEST_CASE("stress profile collapses once the expanded bad set covers the lattice") {
  RunState st = init(reduce_widths(stress_plan()), stress_profile());
  std::optional<Error> failure;
  while (st.completed() < 40) {
    try {
      step(st);
    } catch (const Error& e) {
      failure = e;
      break;
    }
  }
  REQUIRE(failure.has_value());
  CHECK(failure->code() == ErrorCode::LambdaCollapse);
  CHECK(failure->index() == static_cast<std::int64_t>(st.completed() + 1));
}

TEST_CASE("conservative extraction never enlarges the survivor set") {
  // Steps before the expanded bad set is nonempty are identical in both
  // modes; compare from the first step where it is not.
  RunState cons = init(reduce_widths(stress_plan(30)), stress_profile());
  while (cons.completed() < 30) {
    RunState refined = cons;
    refined.options.superlevel.refine = true;
    const StepRecord& rc = step(cons);
    if (rc.Btilde_measure == 0.0) continue;
    const StepRecord& rr = step(refined);
    CHECK(rr.Btilde_measure <= rc.Btilde_measure);
    CHECK(std::includes(rr.lambda.begin(), rr.lambda.end(), rc.lambda.begin(), rc.lambda.end()));
    CHECK(rc.lambda_size() < rc.d_eff);
    break;
  }
  CHECK(cons.record(cons.completed()).Btilde_measure > 0.0);
}

TEST_CASE("factorization recovers Re delta = envelope * cos(carrier x)") {
  const RunState st = run_until_collapse(stress_plan(25), stress_profile());
  for (std::size_t n = 1; n <= st.completed(); ++n) {
    const Factorization f = st.factorization(n);
    CHECK(f.envelope.degree() <= (st.record(n).d_eff - 1) / 2);
    for (double x : {0.05, 1.3, 4.4}) {
      const double expect = st.delta(n)(x).real();
      CHECK(std::abs(f.envelope(x) * std::cos(static_cast<double>(f.carrier) * x) - expect) <
            1e-11 * st.delta(n).coeff_l1());
    }
  }
}

TEST_CASE("parallel_for covers every index once and rethrows the first failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  for (int h : hits) CHECK(h == 1);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 37 || i == 80) throw std::runtime_error(std::to_string(i));
    }, 4);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "37");
  }
  ::setenv("LACUNA_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  ::unsetenv("LACUNA_THREADS");
  CHECK(thread_count() >= 1);
}
