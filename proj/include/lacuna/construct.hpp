#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lacuna/circleset.hpp"
#include "lacuna/plan.hpp"
#include "lacuna/trigpoly.hpp"

namespace lacuna {

struct ConstantProfile {
  double alpha = 316.0;
  double gamma = 210.0;
  double c_H = 1.0;  // placeholder: no numeric value of the majorant constant is known
  double a_offset = 45.0;
  double a_slope = 30.0;
  std::optional<double> beta_override;

  static ConstantProfile paper(double c_H = 1.0) {
    ConstantProfile p;
    p.c_H = c_H;
    return p;
  }

  double beta() const;
  // True when every constant except c_H has its reference value and beta is
  // derived from c_H.
  bool is_paper() const;
  void validate() const;

  friend bool operator==(const ConstantProfile&, const ConstantProfile&) = default;
};

struct ConstructOptions {
  int sup_oversample = 16;
  SuperlevelOptions superlevel;
  bool keep_arcs = false;
  std::size_t threads = 0;  // 0: thread_count()
};

struct SuperlevelSummary {
  std::int64_t j = 0;
  double measure = 0.0;
  std::size_t components = 0;
};

// Everything produced by one inductive step. Frequencies and widths are
// exact integers; measures come from the conservative arc sets.
struct StepRecord {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::int64_t d = 0;
  std::int64_t d_eff = 0;
  std::int64_t half_width = 0;  // floor((d_eff - 1) / 2)
  std::int64_t carrier = 0;     // m + half_width
  double a_n = 0.0;
  double threshold = 0.0;       // beta sqrt(n)
  std::int64_t used_j_max = 0;  // j in [1, used_j_max] enter the expanded set; 0 = none
  bool synthetic = false;       // step 1: not kernel-synthesized

  std::vector<SuperlevelSummary> E;
  double B_measure = 0.0;
  std::size_t B_components = 0;
  double Btilde_measure = 0.0;
  std::size_t Btilde_components = 0;

  std::vector<std::int64_t> lambda;
  std::int64_t l1_num = 0;  // ||delta_n||_1 = l1_num / l1_den exactly
  std::int64_t l1_den = 1;

  NormBracket delta_l1;
  NormBracket delta_sup;
  NormBracket S_sup;
  double S_l2 = 0.0;
  double S_l2_grid = 0.0;
  double S_coeff_l1 = 0.0;
  double log_term = 0.0;  // log_q max(m/d, 1/ln q, 1) with the given width

  std::int64_t lambda_size() const noexcept { return static_cast<std::int64_t>(lambda.size()); }
  double delta_l1_exact() const noexcept {
    return static_cast<double>(l1_num) / static_cast<double>(l1_den);
  }
};

struct StepArcs {
  std::vector<ArcSet> E;  // E[j-1] for j = 1..n-1
  ArcSet B;
  ArcSet Btilde;
};

struct RunState {
  FrequencyPlan plan;
  ConstantProfile profile;
  ConstructOptions options;
  std::vector<TrigPoly> deltas;
  std::vector<TrigPoly> envelopes;  // real nonnegative factor, frequencies -h..h
  std::vector<TrigPoly> partial_sums;
  std::vector<StepRecord> records;
  std::vector<StepArcs> arcs;  // filled only with options.keep_arcs

  std::size_t completed() const noexcept { return deltas.size(); }
  const TrigPoly& delta(std::size_t n) const { return deltas.at(n - 1); }
  const TrigPoly& partial_sum(std::size_t n) const { return partial_sums.at(n - 1); }
  const StepRecord& record(std::size_t n) const { return records.at(n - 1); }

  // delta_n = e^{i carrier x} envelope(x) with a real envelope.
  Factorization factorization(std::size_t n) const;
};

using StepObserver = std::function<void(const RunState&, const StepRecord&, const StepArcs&)>;

double compute_a(std::size_t n, const FrequencyPlan& plan, const ConstantProfile& profile);

// log_q max(m/d, 1/ln q, 1)
double theorem_log_term(double q, std::int64_t m, std::int64_t d);

// Envelope (1/d) sum_{l in lambda} K_h(x - 2 pi l / d), h = floor((d-1)/2),
// assembled from kernel coefficients times lattice character sums.
TrigPoly kernel_sum_envelope(std::int64_t d, std::span<const std::int64_t> lambda);

RunState init(const FrequencyPlan& plan, const ConstantProfile& profile,
              const ConstructOptions& options = {});

const StepRecord& step(RunState& state, const StepObserver& observer = {});

RunState run(const FrequencyPlan& plan, const ConstantProfile& profile, std::size_t steps,
             const StepObserver& observer = {}, const ConstructOptions& options = {});

// Norm fields of a record recomputed from the stored coefficients.
void certify_norms(const RunState& state, StepRecord& record);

// tau(x) = max{t in 1..n-1 : |S_t(x)| <= beta sqrt(n)}, 0 when no t qualifies.
std::vector<std::int64_t> tau_profile(const RunState& state, std::size_t n,
                                      std::span<const double> xs);

}  // namespace lacuna
