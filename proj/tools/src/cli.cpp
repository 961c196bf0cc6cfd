#include "ovcq_tools/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <random>

#include "ovcq_tools/experiments.hpp"

namespace ovcq::tools {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

Json metrics_json(const MetricsCtx& m) {
  return Json{{"row_comparisons", m.row_comparisons},
              {"column_comparisons", m.column_comparisons},
              {"code_decisions", m.code_decisions},
              {"rows_spilled", m.rows_spilled},
              {"bytes_spilled", m.bytes_spilled}};
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else {
    out.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// One header line and one value line with dot-joined keys.
void write_csv(const Json& report, const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> fields;
  flatten(report, "", fields);
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path.string());
  for (std::size_t i = 0; i < fields.size(); ++i) f << (i ? "," : "") << csv_field(fields[i].first);
  f << '\n';
  for (std::size_t i = 0; i < fields.size(); ++i) f << (i ? "," : "") << csv_field(fields[i].second);
  f << '\n';
}

struct GenFlags {
  std::uint64_t rows = 1000000;
  std::uint32_t key_cols = 4;
  double ratio = 0;
  std::vector<std::uint64_t> distinct;
  std::uint32_t payload_cols = 0;
  std::uint64_t seed = 7;

  void add_to(CLI::App& app, bool rows_required) {
    auto* r = app.add_option("--rows", rows, "Row count");
    if (rows_required) r->required();
    app.add_option("--key-cols", key_cols, "Key column count")->check(CLI::Range(1u, 1024u));
    app.add_option("--ratio", ratio, "Input rows per distinct key")->check(CLI::NonNegativeNumber);
    app.add_option("--distinct", distinct, "Distinct values per key column (one, or one per column)")
        ->delimiter(',');
    app.add_option("--payload-cols", payload_cols, "Payload column count");
    app.add_option("--seed", seed, "Random seed");
  }

  GenSpec spec(bool sorted) const {
    GenSpec s;
    s.rows = rows;
    s.key_cols = key_cols;
    s.ratio = ratio;
    s.distinct_per_col = distinct;
    s.payload_cols = payload_cols;
    s.seed = seed;
    s.sorted = sorted;
    if (s.ratio <= 0 && s.distinct_per_col.empty()) s.ratio = 1;
    return s;
  }
};

Json stage_json(const std::vector<StageReport>& stages, std::uint64_t& violations, bool& mismatch,
                std::vector<std::string>& details) {
  Json arr = Json::array();
  for (const auto& s : stages) {
    arr.push_back(Json{{"stage", s.stage},
                       {"rows", s.rows},
                       {"violations", s.violations.size()},
                       {"result_matches", s.result_matches}});
    violations += s.violations.size();
    mismatch = mismatch || !s.result_matches;
    for (const auto& v : s.violations) {
      if (details.size() < 20) details.push_back(s.stage + ": " + v.describe());
    }
    if (!s.result_matches && details.size() < 20) details.push_back(s.stage + ": result differs from reference");
  }
  return arr;
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Offset-value coding query engine toolkit"};
    app.name("ovcq");
    app.require_subcommand(1);
    app.add_option("--csv", csv_, "Also write the report as CSV");
    setup_gen(app);
    setup_sort(app);
    setup_bench_group(app);
    setup_query_intersect(app);
    setup_verify(app);
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? kExitOk : kExitUsage;
    }
    try {
      const int status = action_();
      out_ << report_.dump(2) << '\n';
      if (!csv_.empty()) write_csv(report_, csv_);
      return status;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return e.kind() == ErrorKind::kInvalidArgument ? kExitUsage : kExitDataError;
    }
  }

 private:
  void setup_gen(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen", "Generate a synthetic table");
    cmd->add_option("--csv", csv_, "Also write the report as CSV");
    gen_.add_to(*cmd, true);
    cmd->add_option("--out", out_path_, "Output file")->required();
    cmd->add_option("--format", format_, "plain or rle (default: rle for *.rle, else plain)")
        ->check(CLI::IsMember({"plain", "rle"}));
    cmd->add_flag("--sorted", sorted_, "Sort plain output on the key");
    cmd->callback([this] { action_ = [this] { return cmd_gen(); }; });
  }

  void setup_sort(CLI::App& app) {
    auto* cmd = app.add_subcommand("sort", "Sort a table with the external merge sort");
    cmd->add_option("--csv", csv_, "Also write the report as CSV");
    cmd->add_option("--in", in_path_, "Input table (plain or rle)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_path_, "Write the sorted, coded output as a run file");
    cmd->add_option("--budget", sort_cfg_.memory_budget_rows, "Memory budget in rows")->check(CLI::PositiveNumber);
    cmd->add_option("--fan-in", sort_cfg_.fan_in, "Merge fan-in")->check(CLI::Range(2, 1 << 20));
    cmd->add_option("--run-gen", run_gen_, "minirun or replacement")
        ->check(CLI::IsMember({"minirun", "replacement"}));
    cmd->add_flag("--dedup", sort_cfg_.drop_duplicates, "Drop duplicate keys while merging");
    cmd->add_option("--spill-dir", spill_dir_, "Directory for spill files");
    cmd->callback([this] { action_ = [this] { return cmd_sort(); }; });
  }

  void setup_bench_group(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench-group", "Group-boundary detection: codes versus full comparisons");
    cmd->add_option("--csv", csv_, "Also write the report as CSV");
    cmd->add_option("--in", in_path_, "Sorted input table; generated when absent")->check(CLI::ExistingFile);
    gen_.add_to(*cmd, false);
    cmd->add_option("--g", g_, "Grouping columns (default: all key columns)");
    cmd->add_option("--mode", mode_, "ovc, full-compare or both")
        ->check(CLI::IsMember({"ovc", "full-compare", "both"}));
    cmd->add_option("--repeats", repeats_, "Timed repetitions (best is reported)")->check(CLI::Range(1, 1000));
    cmd->callback([this] { action_ = [this] { return cmd_bench_group(); }; });
  }

  void setup_query_intersect(CLI::App& app) {
    auto* cmd = app.add_subcommand("query-intersect", "Intersect distinct: sort-based versus hash-based plan");
    cmd->add_option("--csv", csv_, "Also write the report as CSV");
    cmd->add_option("--t1", t1_path_, "First input; generated when absent")->check(CLI::ExistingFile);
    cmd->add_option("--t2", t2_path_, "Second input; generated when absent")->check(CLI::ExistingFile);
    gen_.add_to(*cmd, false);
    cmd->add_option("--engine", engine_, "sort, hash or both")->check(CLI::IsMember({"sort", "hash", "both"}));
    cmd->add_option("--budget", intersect_cfg_.budget_rows, "Memory budget per blocking operator, in rows")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--hash-partitions", intersect_cfg_.hash_partitions, "Hash spill fan-out")
        ->check(CLI::Range(2, 4096));
    cmd->add_option("--spill-dir", spill_dir_, "Directory for spill files");
    cmd->callback([this] { action_ = [this] { return cmd_query_intersect(); }; });
  }

  void setup_verify(CLI::App& app) {
    auto* cmd = app.add_subcommand("verify", "Run a plan and validate every code against the oracle");
    cmd->add_option("--csv", csv_, "Also write the report as CSV");
    cmd->add_option("--plan", plan_, "sort or pipeline")->check(CLI::IsMember({"sort", "pipeline"}));
    cmd->add_option("--fixture", fixture_, "Built-in input for the sort plan")->check(CLI::IsMember({"sample"}));
    cmd->add_option("--in", in_path_, "Input table for the sort plan")->check(CLI::ExistingFile);
    gen_.add_to(*cmd, false);
    cmd->add_option("--seeds", seeds_, "Pipeline runs, one per seed")->check(CLI::Range(1, 1000000));
    cmd->add_option("--partitions", verify_opts_.partitions, "Exchange partitions in the pipeline")
        ->check(CLI::Range(1, 256));
    cmd->add_option("--corrupt-index", verify_opts_.corrupt_index, "Corrupt the output code at this index");
    cmd->callback([this] { action_ = [this] { return cmd_verify(); }; });
  }

  int cmd_gen() {
    const std::string format =
        !format_.empty() ? format_ : (fs::path(out_path_).extension() == ".rle" ? "rle" : "plain");
    const Table t = generate_table(gen_.spec(sorted_));
    save_table(t, out_path_, format == "rle" ? DataFormat::kRle : DataFormat::kPlain);
    report_ = Json{{"command", "gen"},
                   {"rows", t.rows.size()},
                   {"key_cols", t.key_cols},
                   {"payload_cols", t.payload_cols},
                   {"format", format},
                   {"out", out_path_}};
    return kExitOk;
  }

  int cmd_sort() {
    const Table t = load_table(in_path_);
    sort_cfg_.run_gen = run_gen_ == "replacement" ? RunGenMode::kReplacementSelection : RunGenMode::kMiniRunMerge;
    sort_cfg_.spill_dir = spill_dir_;
    const auto r = run_sort(t, sort_cfg_, out_path_);
    const auto n = t.rows.size();
    report_ = Json{{"command", "sort"},
                   {"parameters",
                    {{"in", in_path_},
                     {"budget", sort_cfg_.memory_budget_rows},
                     {"fan_in", sort_cfg_.fan_in},
                     {"run_gen", run_gen_},
                     {"dedup", sort_cfg_.drop_duplicates}}},
                   {"rows_in", n},
                   {"rows_out", r.rows_out},
                   {"key_cols", t.key_cols},
                   {"intermediate_merges", r.merge.intermediate_merges},
                   {"final_fan_in", r.merge.final_fan_in},
                   {"metrics", metrics_json(r.metrics)},
                   {"column_comparison_bound", std::uint64_t{n} * t.key_cols},
                   {"log2_factorial", r.log2_factorial},
                   {"wall_ms", r.wall_ms},
                   {"violations", r.violations.size()}};
    return r.violations.empty() ? kExitOk : kExitVerifyFailed;
  }

  Table input_or_generated(const std::string& path, std::uint64_t seed_offset, bool sorted) {
    if (!path.empty()) return load_table(path);
    auto spec = gen_.spec(sorted);
    spec.seed += seed_offset;
    return generate_table(spec);
  }

  int cmd_bench_group() {
    const Table t = input_or_generated(in_path_, 0, true);
    const std::uint32_t g = g_ == 0 ? t.key_cols : g_;
    if (g > t.key_cols) throw Error(ErrorKind::kInvalidArgument, "--g exceeds the key column count");
    Json modes = Json::object();
    std::vector<std::pair<std::string, BoundaryMode>> runs;
    if (mode_ != "full-compare") runs.emplace_back("ovc", BoundaryMode::kCodes);
    if (mode_ != "ovc") runs.emplace_back("full-compare", BoundaryMode::kFullCompare);
    std::vector<double> times;
    for (const auto& [name, mode] : runs) {
      const auto r = bench_group(t, g, mode, repeats_);
      modes[name] = Json{{"metrics", metrics_json(r.metrics)},
                         {"wall_ms", r.wall_ms},
                         {"groups", r.groups},
                         {"checksum", r.checksum.hex()}};
      times.push_back(r.wall_ms);
    }
    report_ = Json{{"experiment", "bench-group"},
                   {"parameters",
                    {{"in", in_path_},
                     {"rows", t.rows.size()},
                     {"key_cols", t.key_cols},
                     {"ratio", in_path_.empty() ? gen_.spec(true).ratio : 0.0},
                     {"seed", gen_.seed},
                     {"g", g},
                     {"repeats", repeats_}}},
                   {"modes", modes}};
    if (times.size() == 2 && times[1] > 0) report_["time_ratio"] = times[0] / times[1];
    return kExitOk;
  }

  int cmd_query_intersect() {
    if (t1_path_.empty() != t2_path_.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "give both --t1 and --t2, or neither");
    }
    if (t1_path_.empty() && gen_.ratio <= 0 && gen_.distinct.empty()) gen_.ratio = 1.25;
    const Table t1 = input_or_generated(t1_path_, 0, false);
    const Table t2 = input_or_generated(t2_path_, 1, false);
    intersect_cfg_.spill_dir = spill_dir_;
    Json engines = Json::object();
    std::vector<IntersectResult> results;
    for (const std::string name : {"sort", "hash"}) {
      if (engine_ != "both" && engine_ != name) continue;
      results.push_back(name == "sort" ? intersect_sort(t1, t2, intersect_cfg_) : intersect_hash(t1, t2, intersect_cfg_));
      const auto& r = results.back();
      engines[name] = Json{{"metrics", metrics_json(r.metrics)},
                           {"wall_ms", r.wall_ms},
                           {"result_rows", r.checksum.rows},
                           {"checksum", r.checksum.hex()}};
    }
    report_ = Json{{"experiment", "query-intersect"},
                   {"parameters",
                    {{"t1", t1_path_},
                     {"t2", t2_path_},
                     {"rows_t1", t1.rows.size()},
                     {"rows_t2", t2.rows.size()},
                     {"key_cols", t1.key_cols},
                     {"ratio", t1_path_.empty() ? gen_.ratio : 0.0},
                     {"seed", gen_.seed},
                     {"budget", intersect_cfg_.budget_rows},
                     {"hash_partitions", intersect_cfg_.hash_partitions}}},
                   {"engines", engines}};
    if (results.size() == 2) {
      const bool same = results[0].checksum == results[1].checksum;
      report_["checksums_equal"] = same;
      if (results[0].metrics.rows_spilled > 0) {
        report_["spill_ratio"] = static_cast<double>(results[1].metrics.rows_spilled) /
                                 static_cast<double>(results[0].metrics.rows_spilled);
      }
      if (!same) return kExitVerifyFailed;
    }
    return kExitOk;
  }

  int cmd_verify() {
    std::uint64_t violations = 0;
    bool mismatch = false;
    std::vector<std::string> details;
    Json runs = Json::array();
    if (plan_ == "sort") {
      Table t;
      if (fixture_ == "sample") {
        t.key_cols = 4;
        t.rows = {{5, 7, 3, 9}, {5, 7, 3, 12}, {5, 8, 4, 6}, {5, 9, 2, 7}, {5, 9, 2, 7}, {5, 9, 3, 4}, {5, 9, 3, 7}};
        std::mt19937_64 rng(gen_.seed);
        std::shuffle(t.rows.begin(), t.rows.end(), rng);
      } else {
        t = input_or_generated(in_path_, 0, false);
      }
      runs.push_back(Json{{"stages", stage_json(verify_sort(t, verify_opts_), violations, mismatch, details)}});
    } else {
      for (std::uint64_t s = 0; s < seeds_; ++s) {
        const auto stages = verify_pipeline(gen_.seed + s, verify_opts_);
        runs.push_back(Json{{"seed", gen_.seed + s}, {"stages", stage_json(stages, violations, mismatch, details)}});
      }
    }
    for (const auto& d : details) err_ << d << '\n';
    report_ = Json{{"command", "verify"},
                   {"plan", plan_},
                   {"partitions", verify_opts_.partitions},
                   {"runs", runs.size()},
                   {"violations", violations},
                   {"results_match", !mismatch},
                   {"details", details},
                   {"ok", violations == 0 && !mismatch}};
    if (seeds_ <= 10 || plan_ == "sort") report_["stages"] = runs;
    return violations == 0 && !mismatch ? kExitOk : kExitVerifyFailed;
  }

  std::ostream& out_;
  std::ostream& err_;
  std::function<int()> action_;
  Json report_;
  std::string csv_;

  GenFlags gen_;
  std::string in_path_;
  std::string out_path_;
  std::string format_;
  bool sorted_ = false;
  SortConfig sort_cfg_;
  std::string run_gen_ = "minirun";
  std::string spill_dir_;
  std::uint32_t g_ = 0;
  std::string mode_ = "both";
  int repeats_ = 3;
  std::string t1_path_;
  std::string t2_path_;
  std::string engine_ = "both";
  IntersectConfig intersect_cfg_;
  std::string plan_ = "pipeline";
  std::string fixture_;
  std::uint64_t seeds_ = 1;
  VerifyOptions verify_opts_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return Cli(out, err).run(argc, argv);
}

}  // namespace ovcq::tools
