#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "stmc/identity.hpp"
#include "stmc/metrics.hpp"

using namespace stmc;
using namespace stmc::metrics;

namespace {

ingest::CommitRecord commit(const std::string& hash, const std::string& msg,
                            std::vector<ingest::FileChange> changes,
                            long long day = 0) {
  ingest::CommitRecord c;
  c.hash = hash;
  c.author_name = "A B";
  c.author_email = "a@x";
  c.message = msg;
  c.authored_at = Timestamp(std::chrono::seconds(0)) + days(day);
  c.file_changes = std::move(changes);
  return c;
}

ingest::IssueRecord issue(const std::string& key, bool bug) {
  ingest::IssueRecord i;
  i.key = key;
  i.issue_type = bug ? ingest::IssueType::bug : ingest::IssueType::other;
  return i;
}

const LanguageProfile& c_profile() {
  return *LanguageProfiles::builtin().for_path("x.c");
}

}  // namespace

TEST(Loc, Examples) {
  EXPECT_EQ(loc_of_snapshot(""), 0u);
  EXPECT_EQ(loc_of_snapshot("a\nb\nc\n"), 3u);
  EXPECT_EQ(loc_of_snapshot("a\nb"), 2u);
}

TEST(Churn, ExamplesAndAdditivity) {
  std::vector<ingest::CommitRecord> one = {commit("h", "", {{"p", 10, 2, false}})};
  EXPECT_EQ(churn_per_window(one, "p"), 12u);
  EXPECT_EQ(churn_per_window(one, "q"), 0u);
  std::vector<ingest::CommitRecord> three = {
      commit("1", "", {{"p", 3, 2, false}}), commit("2", "", {{"p", 0, 0, false}}),
      commit("3", "", {{"p", 7, 0, false}})};
  EXPECT_EQ(churn_per_window(three, "p"), 12u);

  std::mt19937 gen(1);
  std::vector<ingest::CommitRecord> cs;
  for (int i = 0; i < 40; ++i)
    cs.push_back(commit(std::to_string(i), "",
                        {{"p", gen() % 50, gen() % 50, false}}));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ingest::CommitRecord> a, b;
    for (const auto& c : cs) (gen() % 2 ? a : b).push_back(c);
    EXPECT_EQ(churn_per_window(a, "p") + churn_per_window(b, "p"),
              churn_per_window(cs, "p"));
  }
}

TEST(Bugs, Examples) {
  std::vector<ingest::IssueRecord> issues = {issue("B-1", true), issue("F-1", false)};
  std::vector<ingest::CommitRecord> cs = {
      commit("h1", "Fix B-1", {{"p", 1, 1, false}}),
      commit("h2", "More B-1", {{"p", 1, 1, false}}),
      commit("h3", "F-1", {{"p", 1, 1, false}})};
  std::vector<std::pair<std::string, std::string>> links = {
      {"h1", "B-1"}, {"h2", "B-1"}, {"h3", "F-1"}};
  auto s = bug_stats_per_window(links, issues, cs, "p", 200);
  EXPECT_EQ(s.bug_count, 1u);
  EXPECT_DOUBLE_EQ(*s.bug_density, 0.005);
  auto doubled = bug_stats_per_window(links, issues, cs, "p", 400);
  EXPECT_EQ(*doubled.bug_density, *s.bug_density / 2);
  auto none = bug_stats_per_window(links, issues, cs, "q", 10);
  EXPECT_EQ(none.bug_count, 0u);
  EXPECT_EQ(none.bug_density, 0.0);
  EXPECT_FALSE(bug_stats_per_window(links, issues, cs, "p", 0).bug_density);
  // Removing links never increases the count.
  links.pop_back();
  links.pop_back();
  EXPECT_LE(bug_stats_per_window(links, issues, cs, "p", 200).bug_count, 1u);
  links.clear();
  EXPECT_EQ(bug_stats_per_window(links, issues, cs, "p", 200).bug_count, 0u);
}

TEST(Complexity, Examples) {
  auto flat = complexity_estimates("int f(void) {\n  return 1;\n}\n", c_profile());
  EXPECT_EQ(flat.max_nesting, 0u);
  EXPECT_EQ(flat.avg_cyclomatic, 1.0);
  EXPECT_EQ(flat.function_count, 1u);

  auto branches = complexity_estimates(
      "int f(int x) {\n  if (x) x++;\n  if (x > 2) x--;\n"
      "  for (int i = 0; i < x; ++i) {}\n  return x;\n}\n",
      c_profile());
  EXPECT_EQ(branches.avg_cyclomatic, 4.0);

  auto nested = complexity_estimates(
      "void g(void) {\n  if (a) {\n    while (b) {\n      for (;;) {\n"
      "      }\n    }\n  }\n}\n",
      c_profile());
  EXPECT_EQ(nested.max_nesting, 3u);
  EXPECT_EQ(nested.avg_cyclomatic, 4.0);

  auto raw = complexity_estimates("{ { { } } }", c_profile());
  EXPECT_EQ(raw.max_nesting, 3u);
  EXPECT_FALSE(raw.avg_cyclomatic);
}

TEST(Complexity, CommentsAndStringsIgnored) {
  auto cx = complexity_estimates(
      "// if while for\nint f(void) {\n  /* if { */\n  const char* s = \"if {\";\n"
      "  char c = '{';\n  return 0;\n}\n",
      c_profile());
  EXPECT_EQ(cx.max_nesting, 0u);
  EXPECT_EQ(cx.avg_cyclomatic, 1.0);
  EXPECT_EQ(cx.function_count, 1u);
}

TEST(Complexity, FunctionPermutationInvariant) {
  const std::string f1 = "int a(int x) {\n  if (x) return 1;\n  return 0;\n}\n";
  const std::string f2 = "int b(int x) {\n  while (x) x--;\n  for (;;) {}\n}\n";
  const std::string f3 = "static void c(void) {\n}\n";
  auto one = complexity_estimates(f1 + f2 + f3, c_profile());
  auto two = complexity_estimates(f3 + f1 + f2, c_profile());
  EXPECT_EQ(one.avg_cyclomatic, two.avg_cyclomatic);
  EXPECT_DOUBLE_EQ(*one.avg_cyclomatic, (2.0 + 3.0 + 1.0) / 3.0);
  EXPECT_EQ(one, complexity_estimates(f1 + f2 + f3, c_profile()));
}

TEST(Profiles, LookupAndJson) {
  const auto& p = LanguageProfiles::builtin();
  ASSERT_TRUE(p.for_path("src/a.java"));
  EXPECT_EQ(p.for_path("src/a.java")->name, "java");
  EXPECT_FALSE(p.for_path("README"));
  auto custom = LanguageProfiles::from_json(
      R"({"toy": {"extensions": [".toy"], "branch_tokens": ["when"]}})");
  ASSERT_TRUE(custom.for_path("a.toy"));
  auto cx = complexity_estimates("fn f() {\n when x {}\n}\n", *custom.for_path("a.toy"));
  EXPECT_EQ(cx.avg_cyclomatic, 2.0);
  EXPECT_THROW(LanguageProfiles::from_json("[1,2]"), ConfigError);
}

TEST(WindowMetrics, SnapshotsAndReplay) {
  auto root = std::filesystem::temp_directory_path() / "stmc_metrics_snap";
  std::filesystem::remove_all(root);
  SnapshotStore store(root);
  std::vector<ingest::CommitRecord> cs = {
      commit("h1", "", {{"a.c", 4, 0, false}, {"b.c", 2, 0, false}}, 1),
      commit("h2", "Fix B-1", {{"a.c", 1, 2, false}}, 10),
      commit("h3", "", {{"b.c", 0, 2, false}}, 11)};
  store.write("h2", "a.c", "int f(void) {\n  if (x) {}\n}\n");
  std::vector<ingest::IssueRecord> issues = {issue("B-1", true)};
  std::vector<std::pair<std::string, std::string>> links = {{"h2", "B-1"}};
  FileHistory history(cs);
  EXPECT_EQ(history.replayed_loc("a.c", Timestamp(std::chrono::seconds(0)) + days(20)), 3);
  auto ids = resolve_identities(std::vector<PersonKey>{{"A B", "a@x"}});
  MetricsInputs in;
  in.commits = cs;
  in.links = links;
  in.issues = issues;
  in.history = &history;
  in.snapshots = &store;
  in.identities = &ids;
  network::Window w{0, Timestamp(std::chrono::seconds(0)) + days(5),
                    Timestamp(std::chrono::seconds(0)) + days(95)};
  Report report;
  auto rows = window_metrics(in, w, report);
  // b.c has no snapshot and was touched: dropped with a warning.
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(report.size(), 1u);
  const auto& a = rows[0];
  EXPECT_EQ(a.path, "a.c");
  EXPECT_EQ(a.loc, 3u);
  EXPECT_EQ(a.churn, 3u);
  EXPECT_EQ(a.bug_count, 1u);
  EXPECT_DOUBLE_EQ(*a.bug_density, 1.0 / 3.0);
  EXPECT_EQ(a.max_nesting, 1u);
  EXPECT_EQ(a.avg_cyclomatic, 2.0);
  EXPECT_EQ(a.dev_count, 1u);

  // Replay only: b.c was emptied and counts as deleted.
  in.snapshots = nullptr;
  Report r2;
  auto replay = window_metrics(in, w, r2);
  ASSERT_EQ(replay.size(), 1u);
  EXPECT_EQ(replay[0].loc, 3u);
  EXPECT_FALSE(replay[0].max_nesting);

  std::stringstream csv;
  write_metrics_csv(csv, rows);
  EXPECT_EQ(read_metrics_csv(csv), rows);
  std::filesystem::remove_all(root);
}
