#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ovcq_tools/cli.hpp"
#include "ovcq_tools/experiments.hpp"

namespace ovcq::tools {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Run {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ovcq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ovcq_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

TEST_F(CliTest, GenIsDeterministic) {
  for (const auto* name : {"a.tbl", "b.tbl"}) {
    const auto r = cli({"gen", "--rows", "500", "--key-cols", "3", "--ratio", "4", "--seed", "11", "--out", path(name)});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(r.json()["rows"], 500);
  }
  EXPECT_EQ(slurp(path("a.tbl")), slurp(path("b.tbl")));
  ASSERT_EQ(cli({"gen", "--rows", "500", "--key-cols", "3", "--ratio", "4", "--seed", "12", "--out", path("c.tbl")}).code,
            kExitOk);
  EXPECT_NE(slurp(path("a.tbl")), slurp(path("c.tbl")));
}

TEST_F(CliTest, GenRleLoadsBackSorted) {
  ASSERT_EQ(cli({"gen", "--rows", "300", "--key-cols", "2", "--payload-cols", "1", "--out", path("t.rle")}).code,
            kExitOk);
  const auto t = load_table(path("t.rle"));
  ASSERT_EQ(t.rows.size(), 300u);
  EXPECT_EQ(t.key_cols, 2u);
  EXPECT_EQ(t.payload_cols, 1u);
  EXPECT_TRUE(std::is_sorted(t.rows.begin(), t.rows.end(), [](const Row& a, const Row& b) {
    return std::lexicographical_compare(a.begin(), a.begin() + 2, b.begin(), b.begin() + 2);
  }));
}

TEST_F(CliTest, EmptyTableRoundTrips) {
  ASSERT_EQ(cli({"gen", "--rows", "0", "--key-cols", "2", "--out", path("e.tbl")}).code, kExitOk);
  const auto r = cli({"sort", "--in", path("e.tbl")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.json()["rows_out"], 0);
}

TEST_F(CliTest, SortReportsBoundsAndSpill) {
  ASSERT_EQ(cli({"gen", "--rows", "20000", "--key-cols", "4", "--out", path("t.tbl")}).code, kExitOk);
  const auto r = cli({"sort", "--in", path("t.tbl"), "--budget", "1000", "--spill-dir", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["rows_out"], 20000);
  EXPECT_EQ(j["violations"], 0);
  EXPECT_LE(j["metrics"]["column_comparisons"].get<std::uint64_t>(), 20000u * 4);
  EXPECT_GE(j["metrics"]["rows_spilled"].get<std::uint64_t>(), 20000u);
}

TEST_F(CliTest, VerifyFixturePasses) {
  const auto r = cli({"verify", "--plan", "sort", "--fixture", "sample"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.json()["violations"], 0);
  EXPECT_TRUE(r.json()["ok"].get<bool>());
}

TEST_F(CliTest, CorruptedCodeIsReported) {
  const auto r = cli({"verify", "--plan", "sort", "--fixture", "sample", "--corrupt-index", "3"});
  EXPECT_EQ(r.code, kExitVerifyFailed);
  EXPECT_EQ(r.json()["violations"], 1);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, PipelineManySeeds) {
  auto r = cli({"verify", "--seeds", "100"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.json()["runs"], 100);
  r = cli({"verify", "--seeds", "30", "--partitions", "4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.json()["results_match"].get<bool>());
}

TEST_F(CliTest, PipelineCorruptionFails) {
  const auto r = cli({"verify", "--seeds", "3", "--corrupt-index", "0"});
  EXPECT_EQ(r.code, kExitVerifyFailed);
  EXPECT_EQ(r.json()["violations"], 3);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"sort"}).code, kExitUsage);
  EXPECT_EQ(cli({"bench-group", "--mode", "fast"}).code, kExitUsage);
  EXPECT_EQ(cli({"query-intersect", "--engine", "sort", "--budget", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(CliTest, UnsortedInputIsADataError) {
  ASSERT_EQ(cli({"gen", "--rows", "200", "--key-cols", "2", "--out", path("u.tbl")}).code, kExitOk);
  const auto r = cli({"bench-group", "--in", path("u.tbl"), "--repeats", "1"});
  EXPECT_EQ(r.code, kExitDataError);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, GarbageFileIsADataError) {
  std::ofstream(path("junk.tbl")) << "not a table";
  EXPECT_EQ(cli({"sort", "--in", path("junk.tbl")}).code, kExitDataError);
}

TEST_F(CliTest, BenchGroupModesAgree) {
  const auto r = cli({"bench-group", "--rows", "5000", "--key-cols", "3", "--ratio", "10", "--repeats", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["modes"]["ovc"]["checksum"], j["modes"]["full-compare"]["checksum"]);
  EXPECT_EQ(j["modes"]["ovc"]["groups"], 500);
  EXPECT_EQ(j["modes"]["ovc"]["metrics"]["column_comparisons"], 0);
  EXPECT_GE(j["modes"]["full-compare"]["metrics"]["column_comparisons"].get<std::uint64_t>(), 5000u);
}

TEST_F(CliTest, IntersectEnginesAgree) {
  auto r = cli({"query-intersect", "--rows", "5000", "--key-cols", "3", "--budget", "500", "--spill-dir",
                dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = r.json();
  EXPECT_TRUE(j["checksums_equal"].get<bool>());
  EXPECT_GT(j["engines"]["sort"]["result_rows"].get<std::uint64_t>(), 0u);

  r = cli({"query-intersect", "--rows", "5000", "--key-cols", "3", "--budget", "100000"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  j = r.json();
  EXPECT_EQ(j["engines"]["sort"]["metrics"]["rows_spilled"], 0);
  EXPECT_EQ(j["engines"]["hash"]["metrics"]["rows_spilled"], 0);
}

TEST_F(CliTest, IntersectFromFiles) {
  ASSERT_EQ(cli({"gen", "--rows", "800", "--key-cols", "2", "--distinct", "20", "--seed", "1", "--out", path("a.tbl")})
                .code,
            kExitOk);
  ASSERT_EQ(cli({"gen", "--rows", "800", "--key-cols", "2", "--distinct", "20", "--seed", "2", "--out", path("b.rle")})
                .code,
            kExitOk);
  const auto r = cli({"query-intersect", "--t1", path("a.tbl"), "--t2", path("b.rle")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.json()["checksums_equal"].get<bool>());
  EXPECT_EQ(cli({"query-intersect", "--t1", path("a.tbl")}).code, kExitUsage);
}

TEST_F(CliTest, CsvReport) {
  const auto r = cli({"verify", "--plan", "sort", "--fixture", "sample", "--csv", path("r.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream f(path("r.csv"));
  std::string header, values, extra;
  ASSERT_TRUE(std::getline(f, header));
  ASSERT_TRUE(std::getline(f, values));
  EXPECT_FALSE(std::getline(f, extra));
  EXPECT_NE(header.find("violations"), std::string::npos);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(values.begin(), values.end(), ','));
}

}  // namespace
}  // namespace ovcq::tools
