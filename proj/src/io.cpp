#include "lacuna/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lacuna/error.hpp"

namespace lacuna {

namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kMaxExactInt = std::int64_t{1} << 53;

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void dump_into(const json& v, std::string& out, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_into(e, out, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      out += format_double(v.get<double>());
      return;
    default:
      out += v.dump();
      return;
  }
}

std::int64_t exact_int(const json& v, const char* what) {
  if (!v.is_number_integer())
    throw Error(ErrorCode::Format, std::string(what) + " must be an integer");
  std::int64_t x = 0;
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(kMaxExactInt))
      throw Error(ErrorCode::Format, std::string(what) + " exceeds 2^53");
    x = static_cast<std::int64_t>(u);
  } else {
    x = v.get<std::int64_t>();
  }
  if (x > kMaxExactInt || x < -kMaxExactInt)
    throw Error(ErrorCode::Format, std::string(what) + " exceeds 2^53");
  return x;
}

double number(const json& v, const char* what) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw Error(ErrorCode::Format, std::string(what) + " must be a number");
  return v.get<double>();
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorCode::Format, std::string("missing field '") + key + "'");
  return obj.at(key);
}

json bracket_to_json(const NormBracket& b) {
  return json{{"lower", b.lower}, {"upper", b.upper}, {"argmax", b.argmax}, {"grid", b.grid}};
}

NormBracket bracket_from_json(const json& j) {
  NormBracket b;
  b.lower = number(field(j, "lower"), "lower");
  b.upper = number(field(j, "upper"), "upper");
  b.argmax = number(field(j, "argmax"), "argmax");
  b.grid = static_cast<std::size_t>(exact_int(field(j, "grid"), "grid"));
  return b;
}

// Sorted index list as inclusive ranges [[a, b], ...].
json ranges_to_json(const std::vector<std::int64_t>& xs) {
  json out = json::array();
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t k = i;
    while (k + 1 < xs.size() && xs[k + 1] == xs[k] + 1) ++k;
    out.push_back(json::array({xs[i], xs[k]}));
    i = k + 1;
  }
  return out;
}

std::vector<std::int64_t> ranges_from_json(const json& j) {
  std::vector<std::int64_t> xs;
  for (const auto& r : j) {
    if (!r.is_array() || r.size() != 2) throw Error(ErrorCode::Format, "range must be [first, last]");
    const auto a = exact_int(r[0], "range start");
    const auto b = exact_int(r[1], "range end");
    for (std::int64_t v = a; v <= b; ++v) xs.push_back(v);
  }
  return xs;
}

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorCode::Format, "truncated coefficient file");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::string dump_json(const json& value) {
  std::string out;
  dump_into(value, out, -1, 0);
  return out;
}

std::string dump_json_pretty(const json& value) {
  std::string out;
  dump_into(value, out, 2, 0);
  out += '\n';
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

json plan_to_json(const FrequencyPlan& plan) {
  json blocks = json::array();
  for (const Block& b : plan.blocks) blocks.push_back(json{{"m", b.m}, {"d", b.d}, {"d_eff", b.d_eff}});
  return json{{"q", plan.q}, {"blocks", std::move(blocks)}};
}

FrequencyPlan plan_from_json(const json& j) {
  const double q = number(field(j, "q"), "q");
  const json& blocks = field(j, "blocks");
  if (!blocks.is_array()) throw Error(ErrorCode::Format, "'blocks' must be an array");
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::vector<std::int64_t> eff;
  bool has_eff = false;
  for (const auto& b : blocks) {
    pairs.emplace_back(exact_int(field(b, "m"), "m"), exact_int(field(b, "d"), "d"));
    if (b.contains("d_eff")) {
      has_eff = true;
      eff.push_back(exact_int(b.at("d_eff"), "d_eff"));
    } else {
      eff.push_back(pairs.back().second);
    }
  }
  FrequencyPlan plan = validate(q, pairs);
  if (!has_eff) return plan;
  bool all_reduced = true;
  for (std::size_t i = 0; i < eff.size(); ++i) {
    Block& b = plan.blocks[i];
    if (eff[i] < 1 || eff[i] > b.d)
      throw Error(ErrorCode::WidthViolation, "d_eff outside [1, d]", static_cast<std::int64_t>(i + 1));
    b.d_eff = eff[i];
    all_reduced = all_reduced && width_condition_holds(q, b.m, b.d_eff);
  }
  plan.reduced = all_reduced;
  return plan;
}

json profile_to_json(const ConstantProfile& p) {
  return json{{"alpha", p.alpha},       {"beta", p.beta()},         {"gamma", p.gamma},
              {"c_H", p.c_H},           {"a_offset", p.a_offset},   {"a_slope", p.a_slope},
              {"beta_overridden", p.beta_override.has_value()}, {"paper_profile", p.is_paper()}};
}

ConstantProfile profile_from_json(const json& j) {
  ConstantProfile p;
  p.alpha = number(field(j, "alpha"), "alpha");
  p.gamma = number(field(j, "gamma"), "gamma");
  p.c_H = number(field(j, "c_H"), "c_H");
  p.a_offset = number(field(j, "a_offset"), "a_offset");
  p.a_slope = number(field(j, "a_slope"), "a_slope");
  if (j.value("beta_overridden", false)) p.beta_override = number(field(j, "beta"), "beta");
  p.validate();
  return p;
}

json options_to_json(const ConstructOptions& o) {
  return json{{"sup_oversample", o.sup_oversample},
              {"superlevel_oversample", o.superlevel.oversample},
              {"superlevel_refine", o.superlevel.refine},
              {"tol_x", o.superlevel.tol_x}};
}

ConstructOptions options_from_json(const json& j) {
  ConstructOptions o;
  o.sup_oversample = static_cast<int>(exact_int(field(j, "sup_oversample"), "sup_oversample"));
  o.superlevel.oversample = static_cast<int>(exact_int(field(j, "superlevel_oversample"), "superlevel_oversample"));
  o.superlevel.refine = field(j, "superlevel_refine").get<bool>();
  o.superlevel.tol_x = number(field(j, "tol_x"), "tol_x");
  return o;
}

json arcset_to_json(const ArcSet& set) {
  json arcs = json::array();
  for (const Arc& a : set.arcs()) arcs.push_back(json::array({a.start, a.end}));
  return json{{"full", set.full()}, {"arcs", std::move(arcs)}};
}

ArcSet arcset_from_json(const json& j) {
  if (field(j, "full").get<bool>()) return ArcSet::full_circle();
  std::vector<Arc> arcs;
  for (const auto& a : field(j, "arcs")) {
    if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::Format, "arc must be [start, end]");
    double s = number(a[0], "arc start");
    double e = number(a[1], "arc end");
    if (e <= s) e += kTwoPi;  // end written modulo 2 pi
    arcs.push_back({s, e});
  }
  return ArcSet::from_arcs(std::move(arcs));
}

json record_to_json(const StepRecord& r) {
  json e = json::array();
  for (const auto& s : r.E) e.push_back(json{{"j", s.j}, {"measure", s.measure}, {"components", s.components}});
  return json{{"n", r.n},
              {"m", r.m},
              {"d", r.d},
              {"d_eff", r.d_eff},
              {"half_width", r.half_width},
              {"carrier", r.carrier},
              {"a_n", r.a_n},
              {"threshold", r.threshold},
              {"used_j_max", r.used_j_max},
              {"synthetic", r.synthetic},
              {"E", std::move(e)},
              {"B_measure", r.B_measure},
              {"B_components", r.B_components},
              {"Btilde_measure", r.Btilde_measure},
              {"Btilde_components", r.Btilde_components},
              {"lambda_size", r.lambda_size()},
              {"lambda", ranges_to_json(r.lambda)},
              {"delta_l1_exact", json::array({r.l1_num, r.l1_den})},
              {"delta_l1", bracket_to_json(r.delta_l1)},
              {"delta_sup", bracket_to_json(r.delta_sup)},
              {"S_sup", bracket_to_json(r.S_sup)},
              {"S_l2", r.S_l2},
              {"S_l2_grid", r.S_l2_grid},
              {"S_coeff_l1", r.S_coeff_l1},
              {"log_term", r.log_term}};
}

StepRecord record_from_json(const json& j) {
  StepRecord r;
  r.n = exact_int(field(j, "n"), "n");
  r.m = exact_int(field(j, "m"), "m");
  r.d = exact_int(field(j, "d"), "d");
  r.d_eff = exact_int(field(j, "d_eff"), "d_eff");
  r.half_width = exact_int(field(j, "half_width"), "half_width");
  r.carrier = exact_int(field(j, "carrier"), "carrier");
  r.a_n = number(field(j, "a_n"), "a_n");
  r.threshold = number(field(j, "threshold"), "threshold");
  r.used_j_max = exact_int(field(j, "used_j_max"), "used_j_max");
  r.synthetic = field(j, "synthetic").get<bool>();
  for (const auto& s : field(j, "E"))
    r.E.push_back({exact_int(field(s, "j"), "j"), number(field(s, "measure"), "measure"),
                   static_cast<std::size_t>(exact_int(field(s, "components"), "components"))});
  r.B_measure = number(field(j, "B_measure"), "B_measure");
  r.B_components = static_cast<std::size_t>(exact_int(field(j, "B_components"), "B_components"));
  r.Btilde_measure = number(field(j, "Btilde_measure"), "Btilde_measure");
  r.Btilde_components = static_cast<std::size_t>(exact_int(field(j, "Btilde_components"), "Btilde_components"));
  r.lambda = ranges_from_json(field(j, "lambda"));
  if (r.lambda_size() != exact_int(field(j, "lambda_size"), "lambda_size"))
    throw Error(ErrorCode::Format, "lambda ranges disagree with lambda_size");
  const json& l1 = field(j, "delta_l1_exact");
  r.l1_num = exact_int(l1.at(0), "l1 numerator");
  r.l1_den = exact_int(l1.at(1), "l1 denominator");
  r.delta_l1 = bracket_from_json(field(j, "delta_l1"));
  r.delta_sup = bracket_from_json(field(j, "delta_sup"));
  r.S_sup = bracket_from_json(field(j, "S_sup"));
  r.S_l2 = number(field(j, "S_l2"), "S_l2");
  r.S_l2_grid = number(field(j, "S_l2_grid"), "S_l2_grid");
  r.S_coeff_l1 = number(field(j, "S_coeff_l1"), "S_coeff_l1");
  r.log_term = number(field(j, "log_term"), "log_term");
  return r;
}

json report_to_json(const VerificationReport& rep) {
  json settings = json::object();
  for (const auto& [k, v] : rep.settings) settings[k] = v;
  json verdicts = json::array();
  for (const auto& v : rep.verdicts)
    verdicts.push_back(json{{"name", v.name},
                            {"n", v.n},
                            {"j", v.j},
                            {"claim", v.claim},
                            {"bound", v.bound},
                            {"value", v.value},
                            {"margin", v.margin},
                            {"holds", v.holds},
                            {"status", std::string(status_name(v.status))}});
  json majorant = json::array();
  for (const auto& m : rep.majorant)
    majorant.push_back(json{{"n", m.n},
                            {"grid", m.grid},
                            {"S_star_l2sq", m.S_star_l2sq},
                            {"S_l2sq", m.S_l2sq},
                            {"ratio", m.ratio},
                            {"mu_B", m.mu_B},
                            {"chebyshev_bound", m.chebyshev_bound},
                            {"holds", m.holds}});
  json tail = json::array();
  for (const auto& t : rep.tail)
    tail.push_back(json{{"n", t.n},
                        {"points", t.points},
                        {"undefined_tau", t.undefined_tau},
                        {"checked_points", t.checked_points},
                        {"checked_pairs", t.checked_pairs},
                        {"vacuous", t.vacuous},
                        {"max_excess", t.max_excess},
                        {"max_tail_sum", t.max_tail_sum},
                        {"holds", t.holds}});
  return json{{"paper_profile", rep.paper_profile},
              {"theorem_pass", rep.theorem_pass},
              {"all_pass", rep.all_pass},
              {"settings", std::move(settings)},
              {"notes", rep.notes},
              {"verdicts", std::move(verdicts)},
              {"majorant", std::move(majorant)},
              {"tail", std::move(tail)}};
}

VerificationReport report_from_json(const json& j) {
  VerificationReport rep;
  rep.paper_profile = field(j, "paper_profile").get<bool>();
  rep.theorem_pass = field(j, "theorem_pass").get<bool>();
  rep.all_pass = field(j, "all_pass").get<bool>();
  for (auto it = field(j, "settings").begin(); it != j.at("settings").end(); ++it)
    rep.settings.emplace_back(it.key(), it.value().get<std::string>());
  rep.notes = field(j, "notes").get<std::vector<std::string>>();
  for (const auto& v : field(j, "verdicts")) {
    Verdict x;
    x.name = field(v, "name").get<std::string>();
    x.n = exact_int(field(v, "n"), "n");
    x.j = exact_int(field(v, "j"), "j");
    x.claim = field(v, "claim").get<std::string>();
    x.bound = number(field(v, "bound"), "bound");
    x.value = number(field(v, "value"), "value");
    x.margin = number(field(v, "margin"), "margin");
    x.holds = field(v, "holds").get<bool>();
    x.status = status_from_name(field(v, "status").get<std::string>());
    rep.verdicts.push_back(std::move(x));
  }
  for (const auto& m : field(j, "majorant")) {
    MajorantStats s;
    s.n = exact_int(field(m, "n"), "n");
    s.grid = static_cast<std::size_t>(exact_int(field(m, "grid"), "grid"));
    s.S_star_l2sq = number(field(m, "S_star_l2sq"), "S_star_l2sq");
    s.S_l2sq = number(field(m, "S_l2sq"), "S_l2sq");
    s.ratio = number(field(m, "ratio"), "ratio");
    s.mu_B = number(field(m, "mu_B"), "mu_B");
    s.chebyshev_bound = number(field(m, "chebyshev_bound"), "chebyshev_bound");
    s.holds = field(m, "holds").get<bool>();
    rep.majorant.push_back(s);
  }
  for (const auto& t : field(j, "tail")) {
    TailDiagnostics d;
    d.n = exact_int(field(t, "n"), "n");
    d.points = static_cast<std::size_t>(exact_int(field(t, "points"), "points"));
    d.undefined_tau = static_cast<std::size_t>(exact_int(field(t, "undefined_tau"), "undefined_tau"));
    d.checked_points = static_cast<std::size_t>(exact_int(field(t, "checked_points"), "checked_points"));
    d.checked_pairs = static_cast<std::size_t>(exact_int(field(t, "checked_pairs"), "checked_pairs"));
    d.vacuous = field(t, "vacuous").get<bool>();
    d.max_excess = number(field(t, "max_excess"), "max_excess");
    d.max_tail_sum = number(field(t, "max_tail_sum"), "max_tail_sum");
    d.holds = field(t, "holds").get<bool>();
    rep.tail.push_back(d);
  }
  return rep;
}

std::string encode_lacf(const TrigPoly& p) {
  std::string out;
  out.reserve(22 + 16 * p.size());
  out += "LACF";
  put_le<std::uint16_t>(out, 1);
  put_le<std::int64_t>(out, p.min_freq());
  put_le<std::uint64_t>(out, p.size());
  for (const cplx& c : p.coeffs()) {
    put_le<double>(out, c.real());
    put_le<double>(out, c.imag());
  }
  return out;
}

TrigPoly decode_lacf(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "LACF") != 0)
    throw Error(ErrorCode::Format, "bad coefficient file magic");
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != 1) throw Error(ErrorCode::Format, "unsupported coefficient file version");
  const auto min_freq = get_le<std::int64_t>(bytes, pos);
  const auto count = get_le<std::uint64_t>(bytes, pos);
  if (count == 0 || count > (bytes.size() - pos) / 16 || (bytes.size() - pos) != count * 16)
    throw Error(ErrorCode::Format, "coefficient count does not match file size");
  std::vector<cplx> c(static_cast<std::size_t>(count));
  for (auto& v : c) {
    const double re = get_le<double>(bytes, pos);
    const double im = get_le<double>(bytes, pos);
    v = {re, im};
  }
  const bool padded = c.front() == cplx{} || c.back() == cplx{};
  return TrigPoly(min_freq, std::move(c), padded);
}

void write_lacf(const fs::path& path, const TrigPoly& p) { write_text(path, encode_lacf(p)); }

TrigPoly read_lacf(const fs::path& path) { return decode_lacf(read_text(path)); }

std::string delta_filename(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "delta_%03zu.lacf", n);
  return buf;
}

std::string sum_filename(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sum_%03zu.lacf", n);
  return buf;
}

void save_run(const fs::path& dir, const RunState& state, const RunManifestInfo& info) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  write_text(dir / "plan.json", dump_json_pretty(plan_to_json(state.plan)));
  write_text(dir / "profile.json", dump_json_pretty(profile_to_json(state.profile)));
  for (std::size_t n = 1; n <= state.completed(); ++n) write_lacf(dir / delta_filename(n), state.delta(n));
  write_lacf(dir / sum_filename(state.completed()), state.partial_sum(state.completed()));

  std::string lines;
  for (const auto& r : state.records) {
    lines += dump_json(record_to_json(r));
    lines += '\n';
  }
  write_text(dir / "records.jsonl", lines);

  json manifest{{"format", "lacuna-run"},
                {"format_version", 1},
                {"library_version", kVersion},
                {"plan_source", info.plan_source},
                {"steps", state.completed()},
                {"options", options_to_json(state.options)},
                {"config", info.config},
                {"threads", info.threads},
                {"wall_clock_seconds", info.wall_clock_seconds}};
  write_text(dir / "manifest.json", dump_json_pretty(manifest));
}

RunState load_run(const fs::path& dir) {
  auto parse = [](const fs::path& p) {
    try {
      return json::parse(read_text(p));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Format, p.string() + ": " + e.what());
    }
  };
  RunState state;
  state.plan = plan_from_json(parse(dir / "plan.json"));
  state.profile = profile_from_json(parse(dir / "profile.json"));
  const json manifest = parse(dir / "manifest.json");
  state.options = options_from_json(field(manifest, "options"));

  std::istringstream lines(read_text(dir / "records.jsonl"));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    try {
      state.records.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Format, "records.jsonl: " + std::string(e.what()));
    }
  }
  if (state.records.empty()) throw Error(ErrorCode::Format, "run directory has no step records");
  if (state.records.size() > state.plan.size())
    throw Error(ErrorCode::Format, "more step records than plan blocks");

  for (std::size_t n = 1; n <= state.records.size(); ++n) {
    const StepRecord& r = state.records[n - 1];
    if (r.n != static_cast<std::int64_t>(n)) throw Error(ErrorCode::Format, "step records out of order");
    TrigPoly delta = read_lacf(dir / delta_filename(n));
    TrigPoly env = modulate(delta, -r.carrier);
    if (env.min_freq() != -r.half_width || env.max_freq() != r.half_width)
      throw Error(ErrorCode::Format, "coefficient file does not match its record", static_cast<std::int64_t>(n));
    TrigPoly partial = state.partial_sums.empty() ? delta : sum(state.partial_sums.back(), delta);
    state.envelopes.push_back(std::move(env));
    state.deltas.push_back(std::move(delta));
    state.partial_sums.push_back(std::move(partial));
  }
  return state;
}

}  // namespace lacuna
