#include "lacuna/plan.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lacuna/error.hpp"

namespace lacuna {

namespace {

constexpr std::int64_t kMaxExactInt = std::int64_t{1} << 53;
constexpr long double kQuantum = 1.0L - 0x1p-52L;

std::string block_detail(std::size_t j, const char* what) {
  std::ostringstream os;
  os << "block " << j << ": " << what;
  return os.str();
}

double require_param(const PresetParams& params, std::string_view key) {
  auto it = params.find(key);
  if (it == params.end())
    throw Error(ErrorCode::InvalidParam, "missing parameter '" + std::string(key) + "'");
  return it->second;
}

double param_or(const PresetParams& params, std::string_view key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::int64_t as_count(double v, std::string_view key, std::int64_t lo, std::int64_t hi) {
  if (!std::isfinite(v) || v != std::floor(v) || v < static_cast<double>(lo) ||
      v > static_cast<double>(hi)) {
    std::ostringstream os;
    os << "parameter '" << key << "' must be an integer in [" << lo << ", " << hi << "], got " << v;
    throw Error(ErrorCode::InvalidParam, os.str());
  }
  return static_cast<std::int64_t>(v);
}

void check_q(double q) {
  if (!std::isfinite(q) || q <= 1.0)
    throw Error(ErrorCode::InvalidParam, "ratio q must be finite and > 1");
}

}  // namespace

bool ratio_holds(double q, std::int64_t m, std::int64_t next) {
  const long double rhs = static_cast<long double>(q) * static_cast<long double>(m) * kQuantum;
  return static_cast<long double>(next) >= rhs;
}

double width_ratio_floor(double q) { return std::max(1.0, 1.0 / std::log(q)); }

bool width_condition_holds(double q, std::int64_t m, std::int64_t d) {
  if (d < 1 || d > m) return false;
  const long double lq = std::log(static_cast<long double>(q));
  if (lq >= 1.0L) return true;
  return static_cast<long double>(m) * lq >= static_cast<long double>(d);
}

std::int64_t max_effective_width(double q, std::int64_t m) {
  const long double lq = std::log(static_cast<long double>(q));
  if (lq >= 1.0L) return m;
  return static_cast<std::int64_t>(std::floor(static_cast<long double>(m) * lq));
}

FrequencyPlan validate(double q,
                       std::span<const std::pair<std::int64_t, std::int64_t>> pairs) {
  check_q(q);
  if (pairs.empty()) throw Error(ErrorCode::EmptyPlan, "plan has no blocks");

  FrequencyPlan plan;
  plan.q = q;
  plan.blocks.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [m, d] = pairs[i];
    const std::size_t j = i + 1;
    if (m < 1 || m > kMaxExactInt)
      throw Error(ErrorCode::InvalidParam, block_detail(j, "frequency must be in [1, 2^53]"),
                  static_cast<std::int64_t>(j));
    if (i + 1 < pairs.size()) {
      const std::int64_t next = pairs[i + 1].first;
      if (!ratio_holds(q, m, next))
        throw Error(ErrorCode::RatioViolation, block_detail(j, "m_{j+1} < q * m_j"),
                    static_cast<std::int64_t>(j));
      if (d < 1 || d > next - m)
        throw Error(ErrorCode::WidthViolation, block_detail(j, "width outside [1, m_{j+1} - m_j]"),
                    static_cast<std::int64_t>(j));
    } else {
      if (d < 1)
        throw Error(ErrorCode::WidthViolation, block_detail(j, "width must be >= 1"),
                    static_cast<std::int64_t>(j));
      if (d > m)
        plan.warnings.push_back(block_detail(j, "last width exceeds its frequency (no successor to bound it)"));
    }
    plan.blocks.push_back({m, d, d});
  }
  return plan;
}

FrequencyPlan reduce_widths(const FrequencyPlan& plan) {
  FrequencyPlan out = plan;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    Block& b = out.blocks[i];
    const std::int64_t cap = max_effective_width(out.q, b.m);
    if (cap < 1)
      throw Error(ErrorCode::UnreducibleBlock,
                  block_detail(i + 1, "m_j < 1/ln q, no width >= 1 satisfies m_j/d_j >= 1/ln q"),
                  static_cast<std::int64_t>(i + 1));
    b.d_eff = std::min(b.d, cap);
  }
  out.reduced = true;
  return out;
}

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"dyadic",
       "q = 2, m_j = 2^(j+1), d_j = m_{j+1} - m_j",
       {{"N", "number of blocks", true, 0.0}}},
      {"geometric",
       "m_{j+1} = ceil(q m_j), d_j = m_{j+1} - m_j",
       {{"N", "number of blocks", true, 0.0},
        {"q", "ratio > 1", true, 0.0},
        {"m1", "first frequency", true, 0.0}}},
      {"corollary",
       "q = 2, m_j = 2^(j+c0), d_j = max(1, floor(2^(k - k^eps))) with k = j + c0; widths reduced",
       {{"N", "number of blocks", true, 0.0},
        {"eps", "exponent in [0, 1)", true, 0.0},
        {"c0", "frequency offset", false, 1.0}}},
  };
  return catalog;
}

FrequencyPlan preset(std::string_view name, const PresetParams& params) {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;

  if (name == "dyadic") {
    const auto n = as_count(require_param(params, "N"), "N", 1, 50);
    for (std::int64_t j = 1; j <= n; ++j) {
      const std::int64_t m = std::int64_t{1} << (j + 1);
      pairs.emplace_back(m, m);
    }
    return validate(2.0, pairs);
  }

  if (name == "geometric") {
    const auto n = as_count(require_param(params, "N"), "N", 1, 100000);
    const double q = require_param(params, "q");
    check_q(q);
    auto m = as_count(require_param(params, "m1"), "m1", 1, kMaxExactInt);
    auto successor = [q](std::int64_t cur) {
      const long double target =
          static_cast<long double>(q) * static_cast<long double>(cur) * kQuantum;
      auto next = static_cast<std::int64_t>(std::ceil(target));
      return std::max(next, cur + 1);
    };
    for (std::int64_t j = 1; j <= n; ++j) {
      const std::int64_t next = successor(m);
      if (next > kMaxExactInt)
        throw Error(ErrorCode::InvalidParam, "geometric preset exceeds 2^53");
      pairs.emplace_back(m, next - m);
      m = next;
    }
    return validate(q, pairs);
  }

  if (name == "corollary") {
    const auto n = as_count(require_param(params, "N"), "N", 1, 50);
    const double eps = require_param(params, "eps");
    if (!std::isfinite(eps) || eps < 0.0 || eps >= 1.0)
      throw Error(ErrorCode::InvalidParam, "parameter 'eps' must lie in [0, 1)");
    const auto c0 = as_count(param_or(params, "c0", 1.0), "c0", 1, 20);
    if (n + c0 > 52) throw Error(ErrorCode::InvalidParam, "N + c0 must not exceed 52");
    for (std::int64_t j = 1; j <= n; ++j) {
      const auto k = static_cast<double>(j + c0);
      const std::int64_t m = std::int64_t{1} << (j + c0);
      const double width = std::floor(std::exp2(k - std::pow(k, eps)));
      pairs.emplace_back(m, std::max<std::int64_t>(1, static_cast<std::int64_t>(width)));
    }
    return reduce_widths(validate(2.0, pairs));
  }

  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

}  // namespace lacuna
