#include "lacuna/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "lacuna/construct.hpp"
#include "lacuna/error.hpp"
#include "lacuna/io.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/verify.hpp"

namespace lacuna {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void report_error(std::ostream& err, std::string_view code, const std::string& detail,
                  std::optional<std::int64_t> index = std::nullopt) {
  json j{{"error", code}, {"detail", detail}};
  if (index) j["index"] = *index;
  err << dump_json(j) << '\n';
}

// Turns a JSON config object into flag arguments. Keys may be given with or
// without leading dashes; underscores become dashes.
std::vector<std::string> config_args(const fs::path& path) {
  json cfg;
  try {
    cfg = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
  if (!cfg.is_object()) throw Error(ErrorCode::Format, "config must be a JSON object");
  std::vector<std::string> out;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string key = it.key();
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty() || key == "config") throw Error(ErrorCode::Format, "invalid config key '" + it.key() + "'");
    for (char& c : key)
      if (c == '_') c = '-';
    const std::string flag = "--" + key;
    const json& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back(flag);
    } else if (v.is_number_integer()) {
      out.push_back(flag);
      out.push_back(std::to_string(v.get<std::int64_t>()));
    } else if (v.is_number()) {
      out.push_back(flag);
      out.push_back(g17(v.get<double>()));
    } else if (v.is_string()) {
      out.push_back(flag);
      out.push_back(v.get<std::string>());
    } else {
      throw Error(ErrorCode::Format, "config value for '" + it.key() + "' must be a scalar");
    }
  }
  return out;
}

// Config values go first so that explicit flags (parsed later) win under the
// take-last policy.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::vector<std::string> merged{args.front()};
  const auto extra = config_args(*path);
  merged.insert(merged.end(), extra.begin(), extra.end());
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

struct ConstructArgs {
  std::string preset;
  std::string plan_path;
  std::optional<double> N, q, m1, eps, c0;
  double c_h = 1.0;
  std::optional<double> alpha, beta, gamma, a_offset, a_slope;
  int oversample = 16;
  int superlevel_oversample = 8;
  bool refine = false;
  std::size_t threads = 0;
  std::string out;
  std::string config;
};

struct VerifyArgs {
  std::string dir;
  bool no_majorant = false;
  std::size_t tail_points = 64;
  std::string config;
};

struct ExportArgs {
  std::string dir;
  std::string poly = "S";
  std::optional<std::size_t> n;
  std::size_t grid = 65536;
  std::string out;
  std::string bounds;
  std::string config;
};

int do_construct(const ConstructArgs& a, std::ostream& out) {
  if (a.preset.empty() == a.plan_path.empty())
    throw Error(ErrorCode::InvalidParam, "give exactly one of --preset or --plan");

  FrequencyPlan plan;
  json source;
  std::string source_text;
  if (!a.preset.empty()) {
    PresetParams params;
    auto put = [&](const char* k, const std::optional<double>& v) {
      if (v) params[k] = *v;
    };
    put("N", a.N);
    put("q", a.q);
    put("m1", a.m1);
    put("eps", a.eps);
    put("c0", a.c0);
    plan = preset(a.preset, params);
    json pj = json::object();
    for (const auto& [k, v] : params) pj[k] = v;
    source = json{{"preset", a.preset}, {"params", std::move(pj)}};
    source_text = "preset " + a.preset;
  } else {
    json pj;
    try {
      pj = json::parse(read_text(a.plan_path));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Format, a.plan_path + ": " + e.what());
    }
    plan = plan_from_json(pj);
    source = json{{"plan", a.plan_path}};
    source_text = a.plan_path;
  }
  plan = reduce_widths(plan);

  std::size_t steps = plan.size();
  if (a.N && a.plan_path.size()) {
    const double n = *a.N;
    if (n != std::floor(n) || n < 1 || n > static_cast<double>(plan.size()))
      throw Error(ErrorCode::InvalidParam, "--N must be an integer in [1, plan length]");
    steps = static_cast<std::size_t>(n);
  }

  ConstantProfile profile = ConstantProfile::paper(a.c_h);
  if (a.alpha) profile.alpha = *a.alpha;
  if (a.gamma) profile.gamma = *a.gamma;
  if (a.a_offset) profile.a_offset = *a.a_offset;
  if (a.a_slope) profile.a_slope = *a.a_slope;
  if (a.beta) profile.beta_override = *a.beta;
  profile.validate();

  ConstructOptions options;
  if (a.oversample < 8) throw Error(ErrorCode::InvalidParam, "--oversample must be >= 8");
  if (a.superlevel_oversample < 4) throw Error(ErrorCode::InvalidParam, "--superlevel-oversample must be >= 4");
  options.sup_oversample = a.oversample;
  options.superlevel.oversample = a.superlevel_oversample;
  options.superlevel.refine = a.refine;
  options.threads = a.threads;
  if (a.out.empty()) throw Error(ErrorCode::InvalidParam, "--out is required");

  const auto t0 = std::chrono::steady_clock::now();
  auto observer = [&out](const RunState&, const StepRecord& r, const StepArcs&) {
    out << "step " << r.n << ": m=" << r.m << " d_eff=" << r.d_eff << " |Lambda|=" << r.lambda_size()
        << " muB=" << g17(r.B_measure) << " muB~=" << g17(r.Btilde_measure)
        << " sup|S|<=" << g17(r.S_sup.upper) << '\n';
  };
  RunState state = run(plan, profile, steps, observer, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunManifestInfo info;
  info.plan_source = source_text;
  info.wall_clock_seconds = seconds;
  info.threads = a.threads ? a.threads : thread_count();
  info.config = json{{"source", std::move(source)},
                     {"steps", steps},
                     {"profile", profile_to_json(profile)},
                     {"options", options_to_json(options)},
                     {"threads_requested", a.threads}};
  save_run(a.out, state, info);
  out << "wrote " << steps << " steps to " << a.out << '\n';
  return kExitOk;
}

// Recomputes every envelope from its recorded survivor set.
Verdict synthesis_check(const RunState& state) {
  double worst = 0.0;
  std::int64_t worst_n = 0;
  for (std::size_t n = 2; n <= state.completed(); ++n) {
    const StepRecord& r = state.record(n);
    const TrigPoly expect = kernel_sum_envelope(r.d_eff, r.lambda);
    const TrigPoly& got = state.envelopes[n - 1];
    double diff = expect.size() == got.size() ? 0.0 : INFINITY;
    for (std::size_t k = 0; k < expect.size() && k < got.size(); ++k)
      diff = std::max(diff, std::abs(expect.coeffs()[k] - got.coeffs()[k]));
    if (diff > worst || worst_n == 0) {
      worst = std::max(worst, diff);
      worst_n = static_cast<std::int64_t>(n);
    }
  }
  Verdict v;
  v.name = "synthesis";
  v.n = worst_n;
  v.claim = "<=";
  v.bound = 1e-15;
  v.value = worst;
  v.margin = v.bound - v.value;
  v.holds = worst <= v.bound;
  v.status = v.holds ? Status::Pass : Status::Fail;
  return v;
}

int do_verify(const VerifyArgs& a, std::ostream& out) {
  RunState state = load_run(a.dir);
  for (auto& r : state.records) certify_norms(state, r);
  VerifyOptions vo;
  vo.majorant = !a.no_majorant;
  vo.tail_points = a.tail_points;
  VerificationReport rep = verify_run(state, vo);
  if (state.completed() >= 2) {
    Verdict v = synthesis_check(state);
    if (v.status == Status::Fail) rep.all_pass = false;
    rep.verdicts.push_back(std::move(v));
  }
  const fs::path dir(a.dir);
  write_text(dir / "report.json", dump_json_pretty(report_to_json(rep)));
  const std::string text = format_report(rep);
  write_text(dir / "report.txt", text);
  out << text;
  return rep.all_pass ? kExitOk : kExitVerifyFailed;
}

int do_export(const ExportArgs& a, std::ostream& out) {
  RunState state = load_run(a.dir);
  const std::size_t n = a.n.value_or(state.completed());
  if (n < 1 || n > state.completed())
    throw Error(ErrorCode::InvalidParam, "--n must lie in [1, " + std::to_string(state.completed()) + "]");
  if (a.grid < 1) throw Error(ErrorCode::InvalidParam, "--grid must be positive");
  const TrigPoly* p = nullptr;
  if (a.poly == "S") p = &state.partial_sum(n);
  else if (a.poly == "delta") p = &state.delta(n);
  else throw Error(ErrorCode::InvalidParam, "--poly must be S or delta");

  const auto samples = sample(*p, a.grid);
  std::string csv = "x,re,im,abs\n";
  csv.reserve(csv.size() + samples.size() * 80);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double x = kTwoPi * static_cast<double>(k) / static_cast<double>(a.grid);
    csv += g17(x) + ',' + g17(samples[k].real()) + ',' + g17(samples[k].imag()) + ',' +
           g17(std::abs(samples[k])) + '\n';
  }
  const fs::path samples_path =
      a.out.empty() ? fs::path(a.dir) / (a.poly + "_" + std::to_string(n) + ".csv") : fs::path(a.out);
  write_text(samples_path, csv);

  std::string bounds = "N,sup_lower,sup_upper,rhs_theorem\n";
  for (std::size_t N = 1; N <= state.completed(); ++N) {
    const StepRecord& r = state.record(N);
    bounds += std::to_string(N) + ',' + g17(r.S_sup.lower) + ',' + g17(r.S_sup.upper) + ',' +
              g17(theorem_rhs(state, N)) + '\n';
  }
  const fs::path bounds_path = a.bounds.empty() ? fs::path(a.dir) / "bounds.csv" : fs::path(a.bounds);
  write_text(bounds_path, bounds);
  out << "wrote " << samples_path.string() << " (" << samples.size() << " rows) and " << bounds_path.string()
      << '\n';
  return kExitOk;
}

int do_presets(bool as_json, std::ostream& out) {
  if (as_json) {
    json arr = json::array();
    for (const auto& p : preset_catalog()) {
      json params = json::array();
      for (const auto& q : p.params) {
        json e{{"name", q.name}, {"description", q.description}, {"required", q.required}};
        if (!q.required) e["default"] = q.default_value;
        params.push_back(std::move(e));
      }
      arr.push_back(json{{"name", p.name}, {"description", p.description}, {"params", std::move(params)}});
    }
    out << dump_json_pretty(arr);
    return kExitOk;
  }
  for (const auto& p : preset_catalog()) {
    out << p.name << ": " << p.description << '\n';
    for (const auto& q : p.params) {
      out << "  --" << q.name << "  " << q.description;
      if (q.required) out << " (required)";
      else out << " (default " << g17(q.default_value) << ")";
      out << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lacunary block construction and verification", "lacuna"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  ConstructArgs ca;
  auto* construct = app.add_subcommand("construct", "Run the inductive construction and save a run directory");
  construct->add_option("--preset", ca.preset, "Plan preset: dyadic | geometric | corollary");
  construct->add_option("--plan", ca.plan_path, "Plan JSON file {q, blocks: [{m, d}]}");
  construct->add_option("--N", ca.N, "Number of blocks (preset) or steps to run (plan file)");
  construct->add_option("--q", ca.q, "Ratio for the geometric preset");
  construct->add_option("--m1", ca.m1, "First frequency for the geometric preset");
  construct->add_option("--eps", ca.eps, "Exponent for the corollary preset, in [0, 1)");
  construct->add_option("--c0", ca.c0, "Frequency offset for the corollary preset (default 1)");
  construct->add_option("--c-h", ca.c_h, "Majorant constant placeholder; beta = 7 sqrt(2 c_H)")->capture_default_str();
  construct->add_option("--alpha", ca.alpha, "Override alpha (default 316)");
  construct->add_option("--beta", ca.beta, "Override beta directly");
  construct->add_option("--gamma", ca.gamma, "Override gamma (default 210)");
  construct->add_option("--a-offset", ca.a_offset, "Override the a_n offset (default 45)");
  construct->add_option("--a-slope", ca.a_slope, "Override the a_n slope (default 30)");
  construct->add_option("--oversample", ca.oversample, "Sup-norm grid oversampling (>= 8)")->capture_default_str();
  construct->add_option("--superlevel-oversample", ca.superlevel_oversample,
                        "Superlevel grid oversampling (>= 4)")
      ->capture_default_str();
  construct->add_flag("--refine", ca.refine, "Root-refined arc endpoints instead of outward grid snapping");
  construct->add_option("--threads", ca.threads, "Worker threads (0: LACUNA_THREADS or all cores)")
      ->capture_default_str();
  construct->add_option("--out", ca.out, "Output run directory");
  construct->add_option("--config", ca.config, "JSON file of flag values; explicit flags take precedence");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check every bound on a saved run; exit 0 iff all pass");
  verify->add_option("dir", va.dir, "Run directory")->required();
  verify->add_flag("--no-majorant", va.no_majorant, "Skip the maximal-function sweep");
  verify->add_option("--tail-points", va.tail_points, "Sample points for tail diagnostics")->capture_default_str();
  verify->add_option("--config", va.config, "JSON file of flag values");

  ExportArgs ea;
  auto* exp = app.add_subcommand("export", "Write grid samples and the bound table as CSV");
  exp->add_option("dir", ea.dir, "Run directory")->required();
  exp->add_option("--poly", ea.poly, "S (partial sum) or delta")->capture_default_str();
  exp->add_option("--n", ea.n, "Index of the block or partial sum (default: last)");
  exp->add_option("--grid", ea.grid, "Number of equispaced samples")->capture_default_str();
  exp->add_option("--out", ea.out, "Samples CSV path (default <dir>/<poly>_<n>.csv)");
  exp->add_option("--bounds", ea.bounds, "Bounds CSV path (default <dir>/bounds.csv)");
  exp->add_option("--config", ea.config, "JSON file of flag values");

  bool presets_json = false;
  auto* presets = app.add_subcommand("presets", "List plan presets and their parameters");
  presets->add_flag("--json", presets_json, "Machine-readable listing");

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::CallForVersion&) {
      out << kVersion << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      report_error(err, error_name(ErrorCode::InvalidParam), e.what());
      return kExitError;
    }

    if (*construct) return do_construct(ca, out);
    if (*verify) return do_verify(va, out);
    if (*exp) return do_export(ea, out);
    if (*presets) return do_presets(presets_json, out);
    report_error(err, error_name(ErrorCode::InvalidParam), "no subcommand");
    return kExitError;
  } catch (const Error& e) {
    report_error(err, error_name(e.code()), e.detail(), e.index());
    return kExitError;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, error_name(ErrorCode::Io), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    report_error(err, "Internal", e.what());
    return kExitError;
  }
}

}  // namespace lacuna
