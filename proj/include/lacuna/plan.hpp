#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lacuna {

struct Block {
  std::int64_t m = 0;      // lowest frequency of the block
  std::int64_t d = 0;      // width as given
  std::int64_t d_eff = 0;  // width actually used by the construction

  friend bool operator==(const Block&, const Block&) = default;
};

// A validated lacunary frequency plan. Blocks are 1-indexed in every
// diagnostic and error, 0-indexed in `blocks`.
struct FrequencyPlan {
  double q = 2.0;
  std::vector<Block> blocks;
  bool reduced = false;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return blocks.size(); }
  const Block& block(std::size_t n) const { return blocks.at(n - 1); }

  friend bool operator==(const FrequencyPlan& a, const FrequencyPlan& b) {
    return a.q == b.q && a.blocks == b.blocks && a.reduced == b.reduced;
  }
};

// q * m evaluated in extended precision, with the last bit of q treated as
// decimal rounding: a successor passes when next >= q*m*(1 - 2^-52).
bool ratio_holds(double q, std::int64_t m, std::int64_t next);

// max(1, 1/ln q)
double width_ratio_floor(double q);

// True iff m / d >= max(1, 1/ln q), i.e. d <= m * min(1, ln q).
bool width_condition_holds(double q, std::int64_t m, std::int64_t d);

// Largest admissible effective width for frequency m: floor(m * min(1, ln q)).
std::int64_t max_effective_width(double q, std::int64_t m);

FrequencyPlan validate(double q,
                       std::span<const std::pair<std::int64_t, std::int64_t>> pairs);

FrequencyPlan reduce_widths(const FrequencyPlan& plan);

using PresetParams = std::map<std::string, double, std::less<>>;

struct PresetParam {
  std::string name;
  std::string description;
  bool required = false;
  double default_value = 0.0;
};

struct PresetInfo {
  std::string name;
  std::string description;
  std::vector<PresetParam> params;
};

const std::vector<PresetInfo>& preset_catalog();

// dyadic | geometric | corollary. The last block's width follows the same
// rule as the others with the would-be successor m_{N+1}.
FrequencyPlan preset(std::string_view name, const PresetParams& params);

}  // namespace lacuna
