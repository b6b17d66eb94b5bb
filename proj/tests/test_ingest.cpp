#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "stmc/ingest.hpp"

using namespace stmc;
using namespace stmc::ingest;

namespace {

std::string fixture(const char* name) {
  std::ifstream in(std::string(STMC_FIXTURES) + "/" + name, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class Fn>
auto parse_text(Fn fn, const std::string& text, bool strict = false) {
  std::istringstream in(text);
  return fn(in, ParseOptions{strict, "test"});
}

const std::string kHeader =
    "\x01" "COMMIT" "\x01\nhash: abc\nname: A B\nemail: a@x\n"
    "date: 2020-01-01T00:00:00Z\nmsg-begin\nm\nmsg-end\n";

}  // namespace

TEST(CommitLog, EmptyStream) {
  auto r = parse_text(parse_commit_log, "");
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.report.empty());
}

TEST(CommitLog, SingleNumstat) {
  auto r = parse_text(parse_commit_log, kHeader + "10\t2\tsrc/a.c\n");
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].file_changes,
            (std::vector<FileChange>{{"src/a.c", 10, 2, false}}));
}

TEST(CommitLog, MalformedEntryIsPositioned) {
  // Three good records around one whose numstat line is broken (line 23).
  std::string good = kHeader + "1\t1\tf\n";
  auto with_hash = [&](const std::string& h) {
    auto s = good;
    s.replace(s.find("abc"), 3, h);
    return s;
  };
  std::string bad = with_hash("bad");
  bad.replace(bad.find("1\t1\tf"), 5, "x\ty\tf");
  std::string log = with_hash("h1") + with_hash("h2") + bad + with_hash("h3");
  auto r = parse_text(parse_commit_log, log);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[2].hash, "h3");
  ASSERT_EQ(r.report.size(), 1u);
  EXPECT_EQ(r.report.warnings[0].line, 27u);
  EXPECT_THROW(parse_text(parse_commit_log, log, true), FormatError);
  try {
    parse_text(parse_commit_log, log, true);
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 27u);
  }
}

TEST(CommitLog, HeaderProblems) {
  auto r = parse_text(parse_commit_log,
                      "\x01" "COMMIT" "\x01\nhash: a\nmsg-begin\nmsg-end\n");
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.report.size(), 1u);
  auto dup = parse_text(parse_commit_log, kHeader + kHeader);
  EXPECT_EQ(dup.records.size(), 1u);
  EXPECT_EQ(dup.report.size(), 1u);
  auto date = kHeader;
  date.replace(date.find("2020-01-01T00:00:00Z"), 20, "soon");
  EXPECT_EQ(parse_text(parse_commit_log, date).report.size(), 1u);
}

TEST(CommitLog, FixtureRoundTrip) {
  auto r = parse_text(parse_commit_log, fixture("commits.log"), true);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_TRUE(r.report.empty());
  const auto& c = r.records[1];
  EXPECT_EQ(c.author_name, "Bruno Berger");
  EXPECT_EQ(c.message,
            "Fix PROJ-7 crash in router\nmsg-end appears in this line\n"
            "\\escaped backslash");
  EXPECT_EQ(c.file_changes[1], (FileChange{"docs/diagram.png", 0, 0, true}));
  std::ostringstream out;
  write_commit_log(out, r.records);
  auto again = parse_text(parse_commit_log, out.str(), true);
  EXPECT_EQ(again.records, r.records);
}

TEST(CommitLog, RandomRoundTrip) {
  std::mt19937 gen(7);
  const std::string alphabet = "ab \\-\x01msgend:COMIT";
  std::vector<CommitRecord> commits;
  for (int i = 0; i < 50; ++i) {
    CommitRecord c;
    c.hash = "h" + std::to_string(i);
    c.author_name = "Dev " + std::to_string(i % 5);
    c.author_email = "d" + std::to_string(i % 5) + "@x.org";
    c.authored_at = Timestamp(std::chrono::seconds(1600000000 + i * 977));
    int lines = gen() % 4;
    for (int l = 0; l < lines; ++l) {
      if (l) c.message += '\n';
      int len = gen() % 12;
      for (int k = 0; k < len; ++k) c.message += alphabet[gen() % alphabet.size()];
      if (gen() % 5 == 0) c.message += "msg-end";
    }
    if (gen() % 4 == 0) c.message = "msg-end";
    int files = gen() % 3;
    for (int f = 0; f < files; ++f)
      c.file_changes.push_back({"p/" + std::to_string(gen() % 9),
                                gen() % 100, gen() % 100, false});
    commits.push_back(c);
  }
  std::ostringstream out;
  write_commit_log(out, commits);
  auto parsed = parse_text(parse_commit_log, out.str(), true);
  EXPECT_EQ(parsed.records, commits);
}

TEST(Mbox, SingleMessage) {
  auto r = parse_text(parse_mbox,
                      "From a@x Mon Mar  1 10:00:00 2021\nMessage-ID: <m1@x>\n"
                      "From: A <a@x>\nDate: Mon, 1 Mar 2021 10:00:00 +0000\n"
                      "Subject: hi\n\nbody\n");
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_FALSE(r.records[0].in_reply_to);
  EXPECT_EQ(r.records[0].message_id, "m1@x");
}

TEST(Mbox, ThreadFixture) {
  auto r = parse_text(parse_mbox, fixture("thread.mbox"), true);
  EXPECT_TRUE(r.report.empty());
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[1].in_reply_to, "e1@lists.example.org");
  // Folded header, ids kept in order.
  EXPECT_EQ(r.records[2].references,
            (std::vector<std::string>{"e0@lists.example.org",
                                      "e1@lists.example.org"}));
  EXPECT_EQ(r.records[2].from_name, "Chiara Castro");
  EXPECT_EQ(r.records[2].subject, "Re: Router design");
  EXPECT_EQ(r.records[1].sent_at, *parse_iso8601("2021-03-01T11:30:00Z"));
  std::ostringstream out;
  write_mbox(out, r.records);
  auto again = parse_text(parse_mbox, out.str(), true);
  EXPECT_EQ(again.records, r.records);
}

TEST(Mbox, MissingHeadersWarn) {
  auto r = parse_text(parse_mbox,
                      "From a@x Mon Mar  1 10:00:00 2021\nFrom: A <a@x>\n"
                      "Date: Mon, 1 Mar 2021 10:00:00 +0000\n\nbody\n");
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.report.size(), 1u);
}

TEST(Mbox, EncodedWordsAndAddresses) {
  EXPECT_EQ(decode_encoded_words("=?UTF-8?Q?Chiara_Castro?="), "Chiara Castro");
  EXPECT_EQ(decode_encoded_words("=?utf-8?B?UmU6IGhp?= there"), "Re: hi there");
  EXPECT_EQ(decode_encoded_words("plain"), "plain");
  EXPECT_EQ(parse_address("Ada Albers <ada@x.org>"),
            (PersonRef{"Ada Albers", "ada@x.org"}));
  EXPECT_EQ(parse_address("ada@x.org (Ada Albers)"),
            (PersonRef{"Ada Albers", "ada@x.org"}));
  EXPECT_EQ(parse_address("ada@x.org"), (PersonRef{"", "ada@x.org"}));
  EXPECT_EQ(parse_address("\"Albers, Ada\" <ada@x.org>"),
            (PersonRef{"Albers, Ada", "ada@x.org"}));
}

TEST(Issues, EmptyArray) {
  auto r = parse_text(parse_issue_dump, "[]");
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.report.empty());
}

TEST(Issues, FixtureTypesAndComments) {
  auto r = parse_text(parse_issue_dump, fixture("issues.json"), true);
  EXPECT_TRUE(r.report.empty());
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[0].comments.size(), 3u);
  int bugs = 0;
  for (const auto& i : r.records) bugs += i.issue_type == IssueType::bug;
  EXPECT_EQ(bugs, 2);
  EXPECT_EQ(r.records[1].raw_type, "New Feature");
  EXPECT_EQ(r.records[2].comments[0].at, *parse_iso8601("2021-03-07T10:00:00Z"));
  std::ostringstream out;
  write_issue_dump(out, r.records);
  auto again = parse_text(parse_issue_dump, out.str(), true);
  EXPECT_EQ(again.records, r.records);
}

TEST(Issues, BadRecordsSkipped) {
  auto r = parse_text(parse_issue_dump,
                      R"([{"key":"A-1","type":"Bug","created":"2020-01-01",
                           "reporter":{"name":"x","email":"x@y"},"comments":[]},
                          {"type":"Bug"}])");
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.report.size(), 1u);
  EXPECT_THROW(parse_text(parse_issue_dump, "{not json", false), DataError);
}

TEST(Links, Examples) {
  auto commits = parse_text(parse_commit_log, fixture("commits.log")).records;
  auto issues = parse_text(parse_issue_dump, fixture("issues.json")).records;
  auto links = link_commits_to_issues(commits, issues);
  EXPECT_EQ(links.links,
            (std::vector<std::pair<std::string, std::string>>{
                {commits[1].hash, "PROJ-7"}, {commits[2].hash, "PROJ-9"}}));
  EXPECT_EQ(links.unmatched, 0u);

  commits[0].message = "See PROJ-99";
  auto more = link_commits_to_issues(commits, issues);
  EXPECT_EQ(more.unmatched, 1u);
  EXPECT_EQ(more.links.size(), 2u);
  EXPECT_THROW(link_commits_to_issues(commits, issues, "(unclosed"),
               ConfigError);
}

TEST(Links, MonotoneInIssueSet) {
  auto commits = parse_text(parse_commit_log, fixture("commits.log")).records;
  auto issues = parse_text(parse_issue_dump, fixture("issues.json")).records;
  std::vector<IssueRecord> subset = {issues[2]};
  auto small = link_commits_to_issues(commits, subset).links;
  auto large = link_commits_to_issues(commits, issues).links;
  for (const auto& l : small)
    EXPECT_NE(std::find(large.begin(), large.end(), l), large.end());
}
