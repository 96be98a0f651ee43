#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "urnsync/io/records.hpp"
#include "urnsync/io/table.hpp"
#include "urnsync/random.hpp"

using namespace urnsync;
using namespace urnsync::io;

namespace {

Metadata meta() {
  Metadata m;
  m.config = {{"n", 3}, {"note", "a,b \"c\""}};
  return m;
}

Table round_trip(const Table& t, Format f, Metadata* got = nullptr) {
  std::stringstream ss;
  serialize_records(ss, t, meta(), f);
  auto [m, back] = parse_records(ss, f);
  if (got) *got = m;
  return back;
}

const double k_nan = std::numeric_limits<double>::quiet_NaN();
const double k_inf = std::numeric_limits<double>::infinity();

} // namespace

TEST(Csv, QuotingRules) {
  EXPECT_EQ(csv_quote("plain"), "plain");
  EXPECT_EQ(csv_quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_quote("two\nlines"), "\"two\nlines\"");
  const auto recs = parse_csv_records("x,\"a,b\",\"q\"\"q\"\r\n\"multi\nline\",,z\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0], (std::vector<std::string>{"x", "a,b", "q\"q"}));
  EXPECT_EQ(recs[1], (std::vector<std::string>{"multi\nline", "", "z"}));
  EXPECT_THROW((void)parse_csv_records("\"open"), std::runtime_error);
}

TEST(Csv, SeventeenSignificantDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(1.0 / 72), "0.013888888888888888");
  EXPECT_EQ(format_real(k_nan), "nan");
  EXPECT_EQ(format_real(-k_inf), "-inf");
  const UniformSource s(1);
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double v = std::ldexp(s.uniform(0, 1, k) - 0.5, int(k % 600) - 300);
    ASSERT_EQ(parse_real(format_real(v)), v);
  }
  EXPECT_EQ(parse_real(format_real(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
}

TEST(Records, EmptyTableIsHeaderOnly) {
  std::stringstream csv, jsonl;
  write_csv(csv, make_table("moments"), meta());
  write_jsonl(jsonl, make_table("moments"), meta());
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 2);
  lines = 0;
  while (std::getline(jsonl, line)) ++lines;
  EXPECT_EQ(lines, 1);
  EXPECT_TRUE(round_trip(make_table("moments"), Format::csv).rows.empty());
}

TEST(Records, UnknownSchema) {
  EXPECT_THROW((void)make_table("nope"), std::invalid_argument);
  EXPECT_THROW((void)parse_format("xml"), std::invalid_argument);
}

TEST(Records, RoundTripEverySchema) {
  TrajectoryRecord tr;
  tr.points = {{0, 0.5, 0.5, 0.5, 0}, {10, 1.0 / 3, 0.1, 0.7, 0.36666666666666664}};
  tr.full = {{10, {0.1, 0.2, 0.7}}};
  EnsembleEstimates est;
  est.rows = {{5, "v_hat", 0.0123, k_nan, 1}, {5, "x_hat", -1e-300, k_inf, 40}};
  AsymptoticsRecord ar{0.5, classify_regime(0.5), {}, "bounded"};
  ar.fit.slope = -0.891;
  ar.fit.r_squared = 0.9998;
  ar.fit.window = {1000, 1e6};
  CltReport rep;
  rep.replicas = 500;
  rep.rows.push_back(CltRow{});
  rep.rows.back().variance_ok = false;
  MomentSeries ms{{0, 1.0 / 72}, {0, 1.0 / 72}};

  const std::vector<Table> tables{trajectory_table(tr), trajectory_full_table(tr), ensemble_table(est),
                                  asymptotics_table({ar}), clt_table(rep), clt_summary_table(rep),
                                  moments_table(ms, {0, 1.0 / 36}, {0, 1})};
  for (const auto& t : tables)
    for (Format f : {Format::csv, Format::jsonl}) {
      Metadata m;
      const auto back = round_trip(t, f, &m);
      EXPECT_TRUE(same_rows(t, back)) << t.schema;
      EXPECT_EQ(m.schema, t.schema);
      EXPECT_EQ(m.version, version_string);
      EXPECT_EQ(m.config, meta().config);
    }
}

TEST(Records, TextFieldsSurviveCsv) {
  Table t = make_table("ensemble");
  t.rows.push_back({std::int64_t{1}, std::string("odd,\"name\"\nhere"), 1.5, 0.5, std::int64_t{3}});
  EXPECT_TRUE(same_rows(round_trip(t, Format::csv), t));
  EXPECT_TRUE(same_rows(round_trip(t, Format::jsonl), t));
}

TEST(Records, MetadataLine) {
  Metadata m = meta();
  m.schema = "trajectory";
  const auto line = csv_metadata_line(m);
  EXPECT_EQ(line.rfind("# urnsync " + std::string(version_string) + " schema=trajectory config={", 0), 0u);
  const auto back = parse_csv_metadata(line);
  EXPECT_EQ(back.config, m.config);
  EXPECT_THROW((void)parse_csv_metadata("t,z"), std::runtime_error);
}

TEST(Records, WrongWidthRejected) {
  Table t = make_table("moments");
  t.rows.push_back({std::int64_t{1}, 2.0});
  std::stringstream ss;
  EXPECT_THROW(write_csv(ss, t, meta()), std::logic_error);
  std::stringstream bad("# urnsync 1.0.0 schema=moments config={}\nt,v_exact,x_exact,x_inf\n1,2\n");
  EXPECT_THROW((void)read_csv(bad), std::runtime_error);
}
