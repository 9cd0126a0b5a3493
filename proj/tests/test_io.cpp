#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracle_helpers.hpp"
#include "rlogse/errors.hpp"
#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"
#include "rlogse/io.hpp"

using namespace rlogse;

namespace {

// Fresh directory under the system temp root; wiped on construction so
// reruns start clean.
std::filesystem::path scratch_dir(const char* leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "rlogse-tests" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Straight-line reimplementation of the hash, kept deliberately separate
// from the library's loop.
std::uint64_t fnv_reference(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : s) {
    h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  }
  return h;
}

ComplexField random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  ComplexField f(g);
  for (auto& z : f.values()) z = {dist(rng), dist(rng)};
  return f;
}

}  // namespace

TEST_CASE("fnv1a64 matches published vectors and the reference loop") {
  CHECK(fnv1a64(std::string_view{}) == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 16; ++trial) {
    std::string s;
    const auto len = static_cast<std::size_t>(rng() % 64);
    for (std::size_t i = 0; i < len; ++i) s += static_cast<char>(rng() & 0xff);
    CHECK(fnv1a64(s) == fnv_reference(s));
    const auto bytes = std::as_bytes(std::span{s.data(), s.size()});
    CHECK(fnv1a64(bytes) == fnv_reference(s));
  }
}

TEST_CASE("format_real prints exact short decimals and round-trips") {
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(-1.0) == "-1");
  CHECK(format_real(0.25) == "0.25");
  CHECK(format_real(0.0) == "0");
  CHECK(format_real(0.1) == "0.10000000000000001");

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int trial = 0; trial < 64; ++trial) {
    const double x = trial % 4 == 0 ? dist(rng) * 1e-18 : dist(rng);
    const std::string s = format_real(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(std::strtod(format_real(1e-15).c_str(), nullptr) == 1e-15);
  CHECK(std::strtod(format_real(5e-3).c_str(), nullptr) == 5e-3);
}

TEST_CASE("snapshot header is exactly thirteen fixed lines") {
  const Grid g = Grid::make_1d(-1.0, 1.0, 4);
  ComplexField f(g);
  for (int j = 0; j < 4; ++j) f.at(j, 0) = {double(j + 1), double(-j)};
  SnapshotMeta meta;
  meta.t = 0.25;
  meta.lambda = -1.0;
  meta.epsilon = 0.0009765625;  // 2^-10: exact in decimal
  meta.tau = 0.125;
  meta.sweeps = 3;

  const std::string bytes = encode_snapshot(f, meta);
  const std::string expected_header =
      "rlogse-snapshot\n"
      "version 1\n"
      "dims 1\n"
      "nodes 4 1\n"
      "xbounds -1 1\n"
      "ybounds 0 1\n"
      "t 0.25\n"
      "lambda -1\n"
      "epsilon 0.0009765625\n"
      "tau 0.125\n"
      "sweeps 3\n"
      "layout row-major\n"
      "format complex-f64-le\n";
  REQUIRE(bytes.size() == expected_header.size() + 16 * 4);
  CHECK(bytes.substr(0, expected_header.size()) == expected_header);

  // First payload value is 1.0 + 0.0i in little-endian IEEE-754 doubles.
  const unsigned char one_le[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  const unsigned char zero_le[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(std::memcmp(bytes.data() + expected_header.size(), one_le, 8) == 0);
  CHECK(std::memcmp(bytes.data() + expected_header.size() + 8, zero_le, 8) == 0);
}

TEST_CASE("snapshots round-trip bitwise through memory and disk") {
  const Grid g = Grid::make_2d(-2.0, 3.0, 6, 0.0, 1.0, 8);
  ComplexField f = random_field(g, 42);
  f.at(0, 0) = {-0.0, 1e-300};  // awkward bit patterns must survive
  f.at(1, 2) = {1e308, -4.9406564584124654e-324};
  SnapshotMeta meta;
  meta.t = 0.7;
  meta.lambda = -1.0;
  meta.epsilon = 1e-12;
  meta.tau = 5e-3;
  meta.sweeps = 2;

  const std::string bytes = encode_snapshot(f, meta);
  const Snapshot back =
      decode_snapshot(std::as_bytes(std::span{bytes.data(), bytes.size()}));
  REQUIRE(back.field.grid() == g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(back.field[i].real()) ==
          std::bit_cast<std::uint64_t>(f[i].real()));
    CHECK(std::bit_cast<std::uint64_t>(back.field[i].imag()) ==
          std::bit_cast<std::uint64_t>(f[i].imag()));
  }
  CHECK(back.meta.t == meta.t);
  CHECK(back.meta.lambda == meta.lambda);
  CHECK(back.meta.epsilon == meta.epsilon);
  CHECK(back.meta.tau == meta.tau);
  CHECK(back.meta.sweeps == meta.sweeps);

  // Re-encoding the decoded snapshot reproduces the bytes exactly.
  CHECK(encode_snapshot(back.field, back.meta) == bytes);

  const auto dir = scratch_dir("snapshot");
  const auto path = dir / "state.bin";
  write_snapshot(path, f, meta);
  const std::vector<std::byte> disk = read_binary_file(path);
  REQUIRE(disk.size() == bytes.size());
  CHECK(std::memcmp(disk.data(), bytes.data(), bytes.size()) == 0);
  const Snapshot loaded = read_snapshot(path);
  CHECK(encode_snapshot(loaded.field, loaded.meta) == bytes);
}

TEST_CASE("snapshot decoding rejects malformed input") {
  const Grid g = Grid::make_1d(-1.0, 1.0, 4);
  const ComplexField f = random_field(g, 5);
  SnapshotMeta meta;
  meta.sweeps = 1;
  const std::string good = encode_snapshot(f, meta);
  auto as_span = [](const std::string& s) {
    return std::as_bytes(std::span{s.data(), s.size()});
  };
  auto patched = [&](std::string_view from, std::string_view to) {
    std::string s = good;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
  };

  CHECK_THROWS_AS(decode_snapshot(as_span(patched("rlogse-snapshot", "other-snapshot"))),
                  IoError);
  CHECK_THROWS_AS(decode_snapshot(as_span(patched("version 1", "version 2"))), IoError);
  CHECK_THROWS_AS(decode_snapshot(as_span(patched("dims 1", "dims 3"))), IoError);
  CHECK_THROWS_AS(decode_snapshot(as_span(patched("nodes 4 1", "nodes 4 2"))), IoError);
  CHECK_THROWS_AS(decode_snapshot(as_span(patched("nodes 4 1", "nodes 4"))), IoError);
  CHECK_THROWS_AS(decode_snapshot(as_span(patched("t 0", "t zero"))), IoError);
  CHECK_THROWS_AS(decode_snapshot(as_span(patched("layout row-major", "layout col-major"))),
                  IoError);

  std::string truncated = good.substr(0, good.size() - 8);
  CHECK_THROWS_WITH_AS(decode_snapshot(as_span(truncated)),
                       doctest::Contains("payload size mismatch"), IoError);
  std::string header_only = good.substr(0, 40);
  CHECK_THROWS_AS(decode_snapshot(as_span(header_only)), IoError);
}

TEST_CASE("convergence and residual CSV encoders are byte-stable") {
  std::vector<ConvergenceRow> rows(2);
  rows[0].tau = 0.25;
  rows[0].l2_error = 0.5;
  rows[1].tau = 0.125;
  rows[1].l2_error = 0.03125;
  rows[1].order = 4.0;
  CHECK(encode_convergence_csv(rows) ==
        "tau,l2_error,order\n"
        "0.25,0.5,\n"
        "0.125,0.03125,4\n");

  std::vector<StepRecord> recs(1);
  recs[0].step = 1;
  recs[0].t = 0.25;
  recs[0].e_mass = 0.0;
  recs[0].e_energy = 0.5;
  recs[0].beta1 = -0.25;
  recs[0].beta2 = 0.125;
  recs[0].newton_iters = 2;
  CHECK(encode_residuals_csv(recs) ==
        "step,t,e_mass,e_energy,beta1,beta2,newton_iters\n"
        "1,0.25,0,0.5,-0.25,0.125,2\n");
}

TEST_CASE("configuration text parses keys, comments, and repeats") {
  const std::string text =
      "# run parameters\n"
      "tau = 0.01   # step size\n"
      "\n"
      "study = cases-1d/I\n"
      "gausson = 1 1 -5 0 0 0\n"
      "gausson = 1 1 5 0 0 0\n"
      "desk_scale = true\n"
      "nodes = 512\n";
  const std::string_view repeatable[] = {"gausson"};
  const ConfigMap map = parse_config_text(text, repeatable);

  CHECK(map.entries.size() == 6);
  CHECK(config_real(map, "tau") == 0.01);
  CHECK(*map.get("study") == "cases-1d/I");
  CHECK(config_bool(map, "desk_scale"));
  CHECK(config_int(map, "nodes") == 512);
  CHECK_FALSE(map.has("t_end"));
  CHECK_FALSE(map.get("t_end").has_value());

  const auto packets = map.get_all("gausson");
  REQUIRE(packets.size() == 2);
  CHECK(packets[0] == "1 1 -5 0 0 0");
  CHECK(packets[1] == "1 1 5 0 0 0");
  // Scalar lookup on a repeated key is a caller error.
  CHECK_THROWS_AS((void)map.get("gausson"), ConfigError);

  ConfigMap one = parse_config_text("taus = 0.1 0.05 0.025\n");
  const auto taus = config_real_list(one, "taus");
  REQUIRE(taus.size() == 3);
  CHECK(taus[0] == 0.1);
  CHECK(taus[2] == 0.025);
}

TEST_CASE("configuration errors name the offending key or line") {
  CHECK_THROWS_WITH_AS(parse_config_text("tau 0.1\n"), doctest::Contains("line 1"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("Tau = 0.1\n"), doctest::Contains("malformed key"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("tau =\n"), doctest::Contains("empty value"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("tau = 1\ntau = 2\n"),
                       doctest::Contains("duplicate configuration key 'tau'"), ConfigError);

  const ConfigMap map = parse_config_text("tau = fast\nflag = yes\n");
  CHECK_THROWS_WITH_AS((void)config_real(map, "tau"), doctest::Contains("'tau'"), ConfigError);
  CHECK_THROWS_WITH_AS((void)config_int(map, "tau"), doctest::Contains("'tau'"), ConfigError);
  CHECK_THROWS_WITH_AS((void)config_bool(map, "flag"), doctest::Contains("'flag'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS((void)config_real(map, "t_end"),
                       doctest::Contains("missing required key 't_end'"), ConfigError);
}

TEST_CASE("manifests echo parameters and list hashed artifacts") {
  std::vector<Artifact> artifacts;
  artifacts.push_back({"convergence.csv", fnv1a64(std::string_view{})});
  artifacts.push_back({"snapshot_000000.bin", 0x85944171f73967e8ULL});
  const std::string manifest = encode_manifest("study = accuracy-1d\nnodes = 512", artifacts);
  CHECK(manifest ==
        "study = accuracy-1d\n"
        "nodes = 512\n"
        "# artifacts\n"
        "# file convergence.csv fnv1a64 cbf29ce484222325\n"
        "# file snapshot_000000.bin fnv1a64 85944171f73967e8\n");

  // A manifest is itself valid configuration text: comments drop out and the
  // parameter echo parses back unchanged.
  const ConfigMap map = parse_config_text(manifest);
  REQUIRE(map.entries.size() == 2);
  CHECK(*map.get("study") == "accuracy-1d");
  CHECK(config_int(map, "nodes") == 512);
}

TEST_CASE("text file helpers report unusable paths") {
  const auto dir = scratch_dir("textio");
  const auto path = dir / "roundtrip.txt";
  write_text_file(path, "alpha\nbeta\n");
  CHECK(read_text_file(path) == "alpha\nbeta\n");

  CHECK_THROWS_WITH_AS(read_text_file(dir / "missing.txt"), doctest::Contains("missing.txt"),
                       IoError);
  CHECK_THROWS_AS(write_text_file(dir / "no-such-subdir" / "f.txt", "x"), IoError);
}
