#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dasim/errors.hpp"
#include "dasim/event_log.hpp"
#include "support.hpp"

using namespace dasim;
using dasim::testing::ev;
using dasim::testing::make_log;

namespace {

EventLog parse(const std::string& text, const CsvOptions& o = {}) {
  std::istringstream in(text);
  return parse_log(in, o);
}

const std::string kHeader = "case_id,activity,resource,start_time,end_time";

}  // namespace

TEST(EventLogParse, NumericColumn) {
  auto log = parse(kHeader + ",amount\n"
                   "c1,A,r1,2024-01-01T08:00:00Z,2024-01-01T08:10:00Z,10\n"
                   "c1,B,r1,2024-01-01T08:10:00Z,2024-01-01T08:20:00Z,20\n");
  EXPECT_EQ(log.size(), 2u);
  ASSERT_EQ(log.schema().size(), 1u);
  EXPECT_EQ(log.schema().at("amount"), AttrKind::Numeric);
  EXPECT_DOUBLE_EQ(as_number(log.events()[1].attributes.at("amount")), 20.0);
  EXPECT_EQ(log.events()[0].resource, "r1");
}

TEST(EventLogParse, MixedColumnIsCategorical) {
  auto log = parse(kHeader + ",risk\n"
                   "c1,A,,2024-01-01T08:00:00Z,2024-01-01T08:10:00Z,10\n"
                   "c1,B,,2024-01-01T08:10:00Z,2024-01-01T08:20:00Z,high\n");
  EXPECT_EQ(log.schema().at("risk"), AttrKind::Categorical);
  EXPECT_EQ(as_category(log.events()[0].attributes.at("risk")), "10");
  EXPECT_FALSE(log.events()[0].resource.has_value());
}

TEST(EventLogParse, BooleanColumnIsCategorical) {
  auto log = parse(kHeader + ",ok\n"
                   "c1,A,,2024-01-01T08:00:00Z,2024-01-01T08:10:00Z,true\n"
                   "c1,B,,2024-01-01T08:10:00Z,2024-01-01T08:20:00Z,false\n");
  EXPECT_EQ(log.schema().at("ok"), AttrKind::Categorical);
}

TEST(EventLogParse, EmptyCellMeansNotObserved) {
  auto log = parse(kHeader + ",x\n"
                   "c1,A,,2024-01-01T08:00:00Z,2024-01-01T08:10:00Z,\n"
                   "c1,B,,2024-01-01T08:10:00Z,2024-01-01T08:20:00Z,3\n");
  EXPECT_TRUE(log.events()[0].attributes.empty());
  EXPECT_EQ(log.events()[1].attributes.size(), 1u);
}

TEST(EventLogParse, EndBeforeStartNamesTheRow) {
  try {
    parse(kHeader + "\n"
          "c1,A,,2024-01-01T08:00:00Z,2024-01-01T08:10:00Z\n"
          "c1,B,,2024-01-01T09:00:00Z,2024-01-01T08:10:00Z\n");
    FAIL() << "expected RowError";
  } catch (const RowError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(EventLogParse, BadTimestampIsRowError) {
  EXPECT_THROW(parse(kHeader + "\nc1,A,,yesterday,2024-01-01T08:10:00Z\n"), RowError);
}

TEST(EventLogParse, MissingColumnIsSchemaError) {
  EXPECT_THROW(parse("case_id,activity,start_time\nc1,A,2024-01-01T08:00:00Z\n"), SchemaError);
}

TEST(EventLogParse, NaiveTimestampNeedsDefaultZone) {
  const std::string text = kHeader + "\nc1,A,,2024-01-01 08:00:00,2024-01-01 09:00:00\n";
  EXPECT_THROW(parse(text), RowError);
  CsvOptions o;
  o.default_utc_offset_minutes = 60;
  auto log = parse(text, o);
  EXPECT_EQ(format_timestamp(log.events()[0].start_time), "2024-01-01T07:00:00.000Z");
}

TEST(EventLogParse, QuotedFieldsAndCustomColumns) {
  CsvOptions o;
  o.delimiter = ';';
  o.case_column = "case";
  auto log = parse("case;activity;resource;start_time;end_time;note\n"
                   "c1;\"Check; verify\";;2024-01-01T08:00:00Z;2024-01-01T08:00:00Z;\"say \"\"hi\"\"\"\n",
                   o);
  EXPECT_EQ(log.events()[0].activity, "Check; verify");
  EXPECT_EQ(as_category(log.events()[0].attributes.at("note")), "say \"hi\"");
}

TEST(EventLogConstruct, RejectsUndeclaredAttributeAndEmptyActivity) {
  EXPECT_THROW(EventLog({ev("c", "A", 0, 1, {{"x", 1.0}})}, {}), ValidationError);
  EXPECT_THROW(EventLog({ev("c", "", 0, 1)}, {}), ValidationError);
  EXPECT_THROW(EventLog({ev("c", "A", 2, 1)}, {}), ValidationError);
}

TEST(Traces, GroupsAndOrders) {
  auto log = make_log({ev("A", "t1", 0, 1), ev("B", "t1", 0, 1), ev("A", "t2", 5, 6),
                       ev("B", "t2", 3, 4), ev("A", "t3", 2, 3)});
  auto ts = traces(log);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0].events.size(), 3u);
  EXPECT_EQ(ts[1].events.size(), 2u);
  EXPECT_EQ(ts[0].events[1]->activity, "t3");
  EXPECT_TRUE(traces(EventLog{}).empty());
}

TEST(Traces, EqualStartsBreakByEndThenName) {
  auto log = make_log({ev("A", "z", 0, 5), ev("A", "y", 0, 3), ev("A", "b", 0, 5)});
  for (int rep = 0; rep < 3; ++rep) {
    auto ts = traces(log);
    ASSERT_EQ(ts[0].events.size(), 3u);
    EXPECT_EQ(ts[0].events[0]->activity, "y");
    EXPECT_EQ(ts[0].events[1]->activity, "b");
    EXPECT_EQ(ts[0].events[2]->activity, "z");
  }
}

namespace {

EventLog n_traces(int n) {
  std::vector<Event> evs;
  // case k starts at 100*(n-k) so id order differs from start order
  for (int k = 0; k < n; ++k) {
    double s = 100.0 * (n - k);
    evs.push_back(ev("c" + std::to_string(k), "A", s, s + 10));
    evs.push_back(ev("c" + std::to_string(k), "B", s + 10, s + 20));
  }
  return make_log(evs);
}

std::set<std::string> case_ids(const EventLog& log) {
  std::set<std::string> out;
  for (const auto& e : log.events()) out.insert(e.case_id);
  return out;
}

}  // namespace

TEST(SplitTemporal, HalfOfTenIsFiveEarliest) {
  auto [train, test] = split_temporal(n_traces(10), 0.5);
  EXPECT_EQ(case_ids(train), (std::set<std::string>{"c5", "c6", "c7", "c8", "c9"}));
  EXPECT_EQ(case_ids(test).size(), 5u);
}

TEST(SplitTemporal, CeilingAndDegenerate) {
  EXPECT_EQ(case_ids(split_temporal(n_traces(3), 0.5).first).size(), 2u);
  auto [train, test] = split_temporal(n_traces(1), 0.5);
  EXPECT_EQ(case_ids(train).size(), 1u);
  EXPECT_TRUE(test.empty());
}

TEST(SplitTemporal, RatioOutsideUnitIntervalThrows) {
  EXPECT_THROW(split_temporal(n_traces(3), 0.0), ArgumentError);
  EXPECT_THROW(split_temporal(n_traces(3), 1.0), ArgumentError);
  EXPECT_THROW(split_temporal(n_traces(3), -0.2), ArgumentError);
}

namespace {

EventLog random_log(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_cases(1, 12), n_events(1, 6), act(0, 4), coin(0, 2);
  std::uniform_int_distribution<long long> ms(0, 10'000'000);
  std::uniform_real_distribution<double> val(-1e4, 1e4);
  const std::vector<std::string> cats{"low", "mid", "high, very", "q\"uote"};
  std::vector<Event> evs;
  int cases = n_cases(rng);
  for (int c = 0; c < cases; ++c) {
    int k = n_events(rng);
    for (int i = 0; i < k; ++i) {
      Event e;
      e.case_id = "case " + std::to_string(c);
      e.activity = "Act" + std::to_string(act(rng));
      if (coin(rng)) e.resource = "r" + std::to_string(coin(rng));
      e.start_time = TimePoint{} + Millis(ms(rng));
      e.end_time = e.start_time + Millis(ms(rng) / 100);
      e.attributes["num"] = val(rng);
      if (coin(rng)) e.attributes["cat"] = cats[static_cast<std::size_t>(act(rng)) % cats.size()];
      evs.push_back(std::move(e));
    }
  }
  evs.front().attributes["cat"] = cats[0];
  return make_log(std::move(evs));
}

}  // namespace

TEST(EventLogProperty, CsvRoundTrip) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    auto log = random_log(rng);
    std::stringstream ss;
    write_log(ss, log);
    auto back = parse_log(ss);
    EXPECT_EQ(back, log) << "repetition " << rep;
  }
}

TEST(EventLogProperty, TracesPartitionEvents) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    auto log = random_log(rng);
    std::size_t total = 0;
    std::set<const Event*> seen;
    for (const auto& t : traces(log)) {
      total += t.events.size();
      for (const auto* e : t.events) {
        EXPECT_EQ(e->case_id, t.case_id);
        seen.insert(e);
      }
      for (std::size_t i = 1; i < t.events.size(); ++i)
        EXPECT_FALSE(trace_order(*t.events[i], *t.events[i - 1]));
    }
    EXPECT_EQ(total, log.size());
    EXPECT_EQ(seen.size(), log.size());
  }
}

TEST(EventLogProperty, SplitKeepsCasesWhole) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ratio(0.05, 0.95);
  for (int rep = 0; rep < 50; ++rep) {
    auto log = random_log(rng);
    auto [train, test] = split_temporal(log, ratio(rng));
    auto a = case_ids(train), b = case_ids(test);
    for (const auto& c : a) EXPECT_FALSE(b.count(c));
    EXPECT_EQ(train.size() + test.size(), log.size());
  }
}
