#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lopashka/cli.hpp"
#include "lopashka/field_io.hpp"
#include "lopashka/fixtures.hpp"

using namespace lopashka;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lopashka_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string emit(const std::string& fixture) {
    const std::string p = path(fixture + ".json");
    const auto r = run_cli({"fixtures", "emit", fixture, "--out", p});
    EXPECT_EQ(r.code, 0) << r.err;
    return p;
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void write(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

  fs::path dir_;
};

}  // namespace

TEST(FieldIoTest, RoundTripIsBitExact) {
  FieldArray a;
  a.dims = {2, 3, 1};
  for (int i = 0; i < 6; ++i) a.data.emplace_back(std::ldexp(1.0, -i) / 3.0, -std::sqrt(2.0 + i));
  a.data[5] = Complex(-0.0, std::nextafter(1.0, 2.0));
  std::stringstream ss;
  write_field_array(ss, a);
  const FieldArray b = read_field_array(ss);
  EXPECT_EQ(b.dims, a.dims);
  ASSERT_EQ(b.data.size(), a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    EXPECT_EQ(std::memcmp(&a.data[i], &b.data[i], sizeof(Complex)), 0) << i;
  }
}

TEST(FieldIoTest, DocumentedByteLayout) {
  FieldArray a;
  a.dims = {1, 2};
  a.data = {Complex(1.0, -2.0), Complex(0.5, 0.0)};
  std::stringstream ss;
  write_field_array(ss, a);
  const std::string bytes = ss.str();
  // 8 magic + 4 version + 4 ndims + 2 * 8 dims + 8 dtype + 2 * 16 data.
  ASSERT_EQ(bytes.size(), 8u + 4 + 4 + 16 + 8 + 32);
  EXPECT_EQ(bytes.substr(0, 8), std::string("LPFIELD\0", 8));
  EXPECT_EQ(bytes.substr(8, 4), std::string("\x01\x00\x00\x00", 4));
  EXPECT_EQ(bytes.substr(12, 4), std::string("\x02\x00\x00\x00", 4));
  EXPECT_EQ(bytes.substr(16, 8), std::string("\x01\0\0\0\0\0\0\0", 8));
  EXPECT_EQ(bytes.substr(24, 8), std::string("\x02\0\0\0\0\0\0\0", 8));
  EXPECT_EQ(bytes.substr(32, 8), std::string("c128\0\0\0\0", 8));
  // IEEE-754: 1.0 = 0x3ff0000000000000, -2.0 = 0xc000000000000000, little-endian.
  EXPECT_EQ(bytes.substr(40, 8), std::string("\0\0\0\0\0\0\xf0\x3f", 8));
  EXPECT_EQ(bytes.substr(48, 8), std::string("\0\0\0\0\0\0\0\xc0", 8));
}

TEST(FieldIoTest, RejectsCorruptInput) {
  FieldArray a;
  a.dims = {3};
  a.data = {1.0, 2.0, 3.0};
  std::stringstream ss;
  write_field_array(ss, a);
  std::string bytes = ss.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_field_array(truncated), Error);
  bytes[0] = 'X';
  std::stringstream bad(bytes);
  EXPECT_THROW(read_field_array(bad), Error);
  a.dims = {4};
  std::stringstream sink;
  EXPECT_THROW(write_field_array(sink, a), Error);
}

TEST(FieldIoTest, FieldLayouts) {
  const Grid grid{TangentialGrid::uniform(1, 4, 1.0), NormalGrid::uniform(1.0, 8)};
  Field f(grid, 2);
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = static_cast<double>(i);
  const auto a = to_field_array(f);
  EXPECT_EQ(a.dims, (std::vector<std::uint64_t>{4, 8, 2}));
  EXPECT_EQ(a.data, f.data);
  const auto s = to_field_array(std::vector<Field>{f, f});
  EXPECT_EQ(s.dims, (std::vector<std::uint64_t>{2, 4, 8, 2}));
  EXPECT_EQ(s.data.size(), 2 * f.data.size());
}

TEST(CliHelpersTest, ParsersAndHash) {
  EXPECT_EQ(cli::parse_complex("1+0i"), Complex(1.0, 0.0));
  EXPECT_EQ(cli::parse_complex("-2.5"), Complex(-2.5, 0.0));
  EXPECT_EQ(cli::parse_complex("3i"), Complex(0.0, 3.0));
  EXPECT_EQ(cli::parse_complex("1e-3-2e1i"), Complex(1e-3, -20.0));
  for (const char* bad : {"", "i", "1+", "1+2", "1+2j", "abc"}) EXPECT_THROW(cli::parse_complex(bad), Error) << bad;
  EXPECT_EQ(cli::parse_grid("256x128"), (std::vector<int>{256, 128}));
  for (const char* bad : {"", "0x4", "4x", "ax4", "4.5x4"}) EXPECT_THROW(cli::parse_grid(bad), Error) << bad;
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(cli::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(cli::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(cli::fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::LsFailure), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::Parse), 1);
}

TEST_F(CliTest, FixturesListAndEmit) {
  const auto r = run_cli({"fixtures", "list"});
  EXPECT_EQ(r.code, 0);
  for (const auto& name : fixture_names()) EXPECT_NE(r.out.find(name + "\n"), std::string::npos);
  const auto heat = run_cli({"fixtures", "emit", "heat-dirichlet"});
  ASSERT_EQ(heat.code, 0);
  EXPECT_EQ(json::parse(heat.out).at("N"), 1);
  // Catalysis: three components, one mixed row whose order-0 part carries one
  // scalar condition and whose order-1 part carries the two flux conditions.
  const auto cat = cli::load_problem_file(emit("catalysis"));
  EXPECT_EQ(cat.symbol.components(), 3);
  ASSERT_EQ(cat.boundary.slots().size(), 2u);
  EXPECT_EQ(cat.boundary.slots()[0].order, 0);
  EXPECT_EQ(cat.boundary.slots()[0].rank, 1);
  EXPECT_EQ(cat.boundary.slots()[1].order, 1);
  EXPECT_EQ(cat.boundary.slots()[1].rank, 2);
  EXPECT_EQ(run_cli({"fixtures", "emit", "no-such-fixture"}).code, 1);
}

TEST_F(CliTest, EmittedFixturesAnalyzeWithoutEdits) {
  for (const auto& name : fixture_names()) {
    const std::string p = emit(name);
    const auto e = run_cli({"--no-timestamps", "analyze", "ellipticity", "--problem", p, "--samples", "256"});
    EXPECT_EQ(e.code, 0) << name << e.err;
    EXPECT_EQ(json::parse(e.out).at("verdict"), "pass") << name;
    const auto l = run_cli({"--no-timestamps", "analyze", "ls", "--problem", p, "--arc-points", "16", "--directions",
                            "8", "--radii", "8"});
    const bool degenerate = name == "duplicate-rows" || name == "zero-boundary";
    EXPECT_EQ(l.code, degenerate ? 2 : 0) << name << l.err;
    EXPECT_EQ(json::parse(l.out).at("verdict"), degenerate ? "fail" : "pass") << name;
  }
}

TEST_F(CliTest, HeatLsAtRightAngle) {
  const auto r = run_cli({"analyze", "ls", "--problem", emit("heat-dirichlet"), "--phi", "1.5708"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(r.out);
  EXPECT_EQ(report.at("verdicts").at("lopatinskii_shapiro"), true);
  EXPECT_EQ(report.at("results").at("failures"), 0);
  EXPECT_TRUE(report.contains("timestamp"));
}

TEST_F(CliTest, ReportsAreDeterministic) {
  const std::string heat = emit("heat-dirichlet");
  const std::string cat = emit("catalysis");
  const std::vector<std::vector<std::string>> commands{
      {"analyze", "ellipticity", "--problem", cat, "--samples", "512"},
      {"analyze", "ls", "--problem", cat, "--arc-points", "16", "--directions", "8", "--radii", "8"},
      {"solve", "elliptic", "--problem", cat, "--grid", "32x64"},
      {"solve", "parabolic", "--problem", heat, "--T", "0.2", "--dt", "0.02", "--grid", "16x48"},
      {"verify", "rbounds", "--suite", "definition"},
      {"verify", "mr", "--problem", heat, "--trials", "2", "--levels", "2", "--normal-points", "48"}};
  for (const auto& cmd : commands) {
    std::vector<std::string> a{"--no-timestamps", "--seed", "7", "--threads", "1"};
    a.insert(a.end(), cmd.begin(), cmd.end());
    const auto first = run_cli(a);
    a[4] = "3";
    const auto second = run_cli(a);
    ASSERT_EQ(first.code, 0) << cmd[1] << first.err;
    EXPECT_EQ(first.out, second.out) << cmd[0] << " " << cmd[1];
    EXPECT_FALSE(json::parse(first.out).contains("timestamp"));
    EXPECT_EQ(json::parse(first.out).at("seed"), 7);
  }
  // The configuration hash follows the options and the seed.
  auto hash = [&](const std::vector<std::string>& a) { return json::parse(run_cli(a).out).at("config_hash"); };
  const std::vector<std::string> base{"--no-timestamps", "analyze", "ellipticity", "--problem", heat, "--samples", "64"};
  auto seeded = base;
  seeded.insert(seeded.begin(), {"--seed", "1"});
  auto more = base;
  more.back() = "128";
  EXPECT_EQ(hash(base), hash(base));
  EXPECT_NE(hash(base), hash(seeded));
  EXPECT_NE(hash(base), hash(more));
}

TEST_F(CliTest, OutputRouting) {
  const std::string heat = emit("heat-dirichlet");
  // .csv: table to the file, report (with the same table embedded) to stdout.
  const auto r = run_cli({"--no-timestamps", "verify", "rbounds", "--suite", "combinatorial", "--out", path("rb.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(r.out);
  EXPECT_EQ(report.at("table").at("csv"), read(path("rb.csv")));
  EXPECT_EQ(report.at("results").at("violations"), 0);
  // Otherwise --out receives the report.
  const auto j = run_cli({"analyze", "ellipticity", "--problem", heat, "--samples", "64", "--out", path("e.json")});
  ASSERT_EQ(j.code, 0);
  EXPECT_TRUE(j.out.empty());
  EXPECT_NEAR(json::parse(read(path("e.json"))).at("results").at("angle").get<double>(), 0.0, 1e-8);
  // --report overrides the destination.
  const auto k = run_cli({"--report", path("r.json"), "analyze", "ellipticity", "--problem", heat, "--samples", "64"});
  EXPECT_TRUE(k.out.empty());
  EXPECT_EQ(json::parse(read(path("r.json"))).at("command"), "analyze ellipticity");
}

TEST_F(CliTest, SolveWritesBinaryFields) {
  const std::string cat = emit("catalysis");
  const auto r = run_cli({"--no-timestamps", "solve", "elliptic", "--problem", cat, "--grid", "32x64", "--lambda",
                          "2-1i", "--out", path("u.bin")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(r.out);
  const auto u = load_field_array(path("u.bin"));
  EXPECT_EQ(u.dims, (std::vector<std::uint64_t>{32, 64, 3}));
  double sup = 0.0;
  for (const auto& z : u.data) sup = std::max(sup, std::abs(z));
  EXPECT_EQ(sup, report.at("results").at("sup_norm").get<double>());
  EXPECT_EQ(report.at("results").at("lambda"), json::array({2.0, -1.0}));
  EXPECT_GT(sup, 0.0);

  const auto p = run_cli({"--no-timestamps", "solve", "parabolic", "--problem", cat, "--T", "0.1", "--dt", "0.01",
                          "--grid", "16x48", "--output-every", "5", "--out", path("ut.bin")});
  ASSERT_EQ(p.code, 0) << p.err;
  const auto ut = load_field_array(path("ut.bin"));
  EXPECT_EQ(ut.dims, (std::vector<std::uint64_t>{3, 16, 48, 3}));
  const auto times = json::parse(p.out).at("results").at("times").get<std::vector<double>>();
  ASSERT_EQ(times.size(), 3u);
  EXPECT_NEAR(times[2], 0.1, 1e-15);
  // Zero initial state.
  for (std::size_t i = 0; i < 16 * 48 * 3; ++i) EXPECT_EQ(ut.data[i], Complex(0.0));
}

TEST_F(CliTest, ExitCodes) {
  const std::string heat = emit("heat-dirichlet");
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"analyze"}).code, 1);
  EXPECT_EQ(run_cli({"analyze", "ls"}).code, 1);
  EXPECT_EQ(run_cli({"verify", "rbounds", "--suite", "nonsense"}).code, 1);
  EXPECT_EQ(run_cli({"analyze", "ls", "--problem", path("missing.json")}).code, 1);
  EXPECT_EQ(run_cli({"solve", "elliptic", "--problem", heat, "--lambda", "one"}).code, 1);
  EXPECT_EQ(run_cli({"solve", "elliptic", "--problem", heat, "--grid", "32"}).code, 1);

  write(path("bad.json"), "{\n  \"m\": 1,\n  \"n\": [1,\n}\n");
  const auto bad = run_cli({"analyze", "ellipticity", "--problem", path("bad.json")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("line 4, column 1"), std::string::npos) << bad.err;

  // A fixture reference is a valid problem document.
  write(path("ref.json"), R"({"fixture": "heat-neumann", "name": "my-neumann"})");
  const auto ref = run_cli({"--no-timestamps", "analyze", "ls", "--problem", path("ref.json"), "--arc-points", "8"});
  EXPECT_EQ(ref.code, 0) << ref.err;
  EXPECT_EQ(json::parse(ref.out).at("problem"), "my-neumann");

  // -|xi|^2 is not parameter-elliptic: verification failure, exit 2 with a report.
  auto doc = json::parse(read(heat));
  for (auto& term : doc.at("interior")) term.at("re")[0][0] = -1.0;
  write(path("backward.json"), doc.dump());
  const auto e = run_cli({"--no-timestamps", "analyze", "ellipticity", "--problem", path("backward.json")});
  EXPECT_EQ(e.code, 2);
  EXPECT_EQ(json::parse(e.out).at("verdict"), "fail");
  const auto s = run_cli({"--no-timestamps", "solve", "parabolic", "--problem", path("backward.json"), "--T", "0.1",
                          "--dt", "0.05", "--grid", "8x16"});
  EXPECT_EQ(s.code, 2) << s.err;
  EXPECT_TRUE(json::parse(s.out).contains("error"));
}
