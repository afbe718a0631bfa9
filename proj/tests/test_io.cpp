#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "doctest.h"
#include "lacuna/construct.hpp"
#include "lacuna/error.hpp"
#include "lacuna/io.hpp"
#include "oracles.hpp"

using namespace lacuna;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("lacuna_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::EmptyPlan;
}

}  // namespace

TEST_CASE("floats are written with 17 significant digits and a decimal point") {
  CHECK(dump_json(json(0.1)) == "0.10000000000000001");
  CHECK(dump_json(json(2.0)) == "2.0");
  CHECK(dump_json(json(1e300)) == "1.0000000000000001e+300");
  CHECK(dump_json(json(std::numeric_limits<double>::quiet_NaN())) == "null");
  CHECK(dump_json(json(std::int64_t{3})) == "3");
  CHECK(dump_json(json{{"a", 1.5}, {"b", {1, 2}}}) == R"({"a":1.5,"b":[1,2]})");
  CHECK(dump_json_pretty(json{{"a", 1}}) == "{\n  \"a\": 1\n}\n");
  // every double survives a text round trip
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(json::parse(dump_json(json(x))).get<double>() == x);
  }
}

TEST_CASE("plan round trip keeps given and effective widths") {
  const FrequencyPlan p = reduce_widths(preset("geometric", {{"N", 12}, {"q", 1.3}, {"m1", 50}}));
  const FrequencyPlan back = plan_from_json(json::parse(dump_json(plan_to_json(p))));
  CHECK(back.q == p.q);
  REQUIRE(back.size() == p.size());
  for (std::size_t j = 1; j <= p.size(); ++j) CHECK(back.block(j) == p.block(j));
}

TEST_CASE("integers beyond 2^53 or with fractions are rejected") {
  json j = plan_to_json(reduce_widths(preset("dyadic", {{"N", 3}})));
  json big = j;
  big["blocks"][2]["m"] = std::uint64_t{1} << 54;
  CHECK(code_of([&] { plan_from_json(big); }) == ErrorCode::Format);
  json frac = j;
  frac["blocks"][1]["d"] = 2.5;
  CHECK(code_of([&] { plan_from_json(frac); }) == ErrorCode::Format);
  json missing = j;
  missing["blocks"][0].erase("m");
  CHECK(code_of([&] { plan_from_json(missing); }) == ErrorCode::Format);
  // integers must be written as integers
  json integral_float = j;
  integral_float["blocks"][0]["d"] = 1.0;
  CHECK(code_of([&] { plan_from_json(integral_float); }) == ErrorCode::Format);
}

TEST_CASE("profile and options round trip") {
  ConstantProfile p;
  p.beta_override = 0.5;
  p.a_offset = 2.0;
  CHECK(profile_from_json(json::parse(dump_json(profile_to_json(p)))) == p);
  CHECK(profile_from_json(profile_to_json(ConstantProfile{})) == ConstantProfile{});
  ConstructOptions o;
  o.sup_oversample = 32;
  o.superlevel.refine = true;
  o.superlevel.oversample = 6;
  const ConstructOptions b = options_from_json(options_to_json(o));
  CHECK(b.sup_oversample == 32);
  CHECK(b.superlevel.refine);
  CHECK(b.superlevel.oversample == 6);
  CHECK(b.superlevel.tol_x == o.superlevel.tol_x);
}

TEST_CASE("arc sets round trip exactly") {
  std::mt19937_64 rng(99);
  const ArcSet arcs = ArcSet::from_arcs(oracle::random_arcs(rng, 12, 0.01, 0.3));
  const ArcSet back = arcset_from_json(json::parse(dump_json(arcset_to_json(arcs))));
  CHECK(back == arcs);
  CHECK(arcset_from_json(arcset_to_json(ArcSet::full_circle())) == ArcSet::full_circle());
  CHECK(arcset_from_json(arcset_to_json(ArcSet{})).empty());
}

TEST_CASE("coefficient file layout") {
  const TrigPoly p(-2, {cplx(1.0, -0.5), cplx(0.25, 0.0)});
  const std::string bytes = encode_lacf(p);
  REQUIRE(bytes.size() == 22 + 32);
  CHECK(bytes.substr(0, 4) == "LACF");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[5]) == 0);
  // min frequency -2, little-endian two's complement
  CHECK(static_cast<unsigned char>(bytes[6]) == 0xFE);
  for (int i = 7; i < 14; ++i) CHECK(static_cast<unsigned char>(bytes[i]) == 0xFF);
  CHECK(static_cast<unsigned char>(bytes[14]) == 2);
  // 1.0 = 0x3FF0000000000000
  CHECK(static_cast<unsigned char>(bytes[22 + 7]) == 0x3F);
  CHECK(static_cast<unsigned char>(bytes[22 + 6]) == 0xF0);
  CHECK(decode_lacf(bytes) == p);
}

TEST_CASE("malformed coefficient files are rejected") {
  const std::string good = encode_lacf(TrigPoly(5, {cplx(1.0), cplx(0.0, 2.0), cplx(3.0)}));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(code_of([&] { decode_lacf(bad_magic); }) == ErrorCode::Format);
  std::string bad_version = good;
  bad_version[4] = 2;
  CHECK(code_of([&] { decode_lacf(bad_version); }) == ErrorCode::Format);
  CHECK(code_of([&] { decode_lacf(good.substr(0, good.size() - 1)); }) == ErrorCode::Format);
  CHECK(code_of([&] { decode_lacf(good.substr(0, 10)); }) == ErrorCode::Format);
  CHECK(code_of([&] { decode_lacf(good + "x"); }) == ErrorCode::Format);
  CHECK(code_of([&] { decode_lacf(""); }) == ErrorCode::Format);
  CHECK(code_of([&] { read_lacf("/nonexistent/dir/file.lacf"); }) == ErrorCode::Io);
}

TEST_CASE("random polynomials survive the coefficient file bit for bit") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const TrigPoly p = oracle::random_poly(rng, static_cast<std::int64_t>(seed * 37) - 900, 1 + seed % 40);
    const TrigPoly back = decode_lacf(encode_lacf(p));
    CHECK(back.min_freq() == p.min_freq());
    CHECK(back.size() == p.size());
    CHECK(std::equal(back.coeffs().begin(), back.coeffs().end(), p.coeffs().begin(), p.coeffs().end()));
  }
}

TEST_CASE("file names are zero padded") {
  CHECK(delta_filename(7) == "delta_007.lacf");
  CHECK(delta_filename(123) == "delta_123.lacf");
  CHECK(sum_filename(40) == "sum_040.lacf");
}

TEST_CASE("saved runs load back with identical coefficients and records") {
  TempDir tmp;
  ConstructOptions opts;
  opts.threads = 2;
  const RunState st = run(reduce_widths(preset("dyadic", {{"N", 8}})), ConstantProfile{}, 8, {}, opts);
  RunManifestInfo info;
  info.plan_source = "preset dyadic";
  info.threads = 2;
  save_run(tmp.path, st, info);
  for (const char* f : {"plan.json", "profile.json", "records.jsonl", "manifest.json", "sum_008.lacf"})
    CHECK(fs::exists(tmp.path / f));
  for (std::size_t n = 1; n <= 8; ++n) CHECK(fs::exists(tmp.path / delta_filename(n)));

  const RunState back = load_run(tmp.path);
  REQUIRE(back.completed() == 8);
  CHECK(back.plan.q == st.plan.q);
  CHECK(back.profile == st.profile);
  for (std::size_t n = 1; n <= 8; ++n) {
    CHECK(back.delta(n) == st.delta(n));
    CHECK(back.partial_sum(n) == st.partial_sum(n));
    CHECK(back.record(n).lambda == st.record(n).lambda);
    CHECK(back.record(n).l1_num == st.record(n).l1_num);
    CHECK(back.record(n).S_sup.upper == st.record(n).S_sup.upper);
    // rebuilt envelopes agree with the stored factorization
    const TrigPoly& e0 = st.envelopes[n - 1];
    const TrigPoly& e1 = back.envelopes[n - 1];
    for (std::int64_t k = -st.record(n).half_width; k <= st.record(n).half_width; ++k)
      CHECK(std::abs(e0.coeff(k) - e1.coeff(k)) <= 1e-15);
  }

  const json manifest = json::parse(read_text(tmp.path / "manifest.json"));
  CHECK(manifest.at("steps") == 8);
  CHECK(manifest.at("plan_source") == "preset dyadic");
}

TEST_CASE("loading a damaged run reports the right error") {
  TempDir tmp;
  const RunState st = run(reduce_widths(preset("dyadic", {{"N", 4}})), ConstantProfile{}, 4);
  save_run(tmp.path, st, RunManifestInfo{});
  CHECK(code_of([&] { load_run(tmp.path / "missing"); }) == ErrorCode::Io);
  fs::remove(tmp.path / delta_filename(3));
  CHECK(code_of([&] { load_run(tmp.path); }) == ErrorCode::Io);
  write_text(tmp.path / delta_filename(3), "LACF");
  CHECK(code_of([&] { load_run(tmp.path); }) == ErrorCode::Format);
}
