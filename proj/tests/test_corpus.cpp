#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lingdiv/corpus.hpp"

using namespace lingdiv;

namespace {

IngestConfig test_config() {
  IngestConfig cfg;
  cfg.registry.add("USA", "America, North");
  cfg.registry.add("IND", "Asia, South");
  cfg.registry.add("ERI", "Africa, Sub");
  return cfg;
}

RawRecord raw(std::string chars = "40") {
  RawRecord r;
  r.id = "1";
  r.ts = "2019-07-15T12:00:00Z";
  r.country = "USA";
  r.lang = "eng";
  r.chars = std::move(chars);
  return r;
}

RejectReason reason_of(const ValidationResult& v) { return std::get<Rejection>(v).reason; }

}  // namespace

TEST(YearMonth, ParseFormatArithmetic) {
  auto m = YearMonth::parse("2020-03");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->str(), "2020-03");
  EXPECT_EQ((*m - 12).str(), "2019-03");
  EXPECT_EQ((YearMonth(2019, 12) + 1).str(), "2020-01");
  EXPECT_FALSE(YearMonth::parse("2020-13"));
  EXPECT_FALSE(YearMonth::parse("2020-3"));
  EXPECT_EQ(MonthRange({YearMonth(2018, 7), YearMonth(2020, 8)}).size(), 26);
}

TEST(Timestamp, ParsesIsoVariants) {
  const auto base = parse_timestamp("2020-03-01T00:00:00Z");
  ASSERT_TRUE(base);
  EXPECT_EQ(*base, 1583020800);
  EXPECT_EQ(parse_timestamp("2020-03-01 00:00:00"), base);
  EXPECT_EQ(parse_timestamp("2020-03-01T00:00:00.123Z"), base);
  EXPECT_EQ(parse_timestamp("2020-03-01T01:00:00+01:00"), base);
  EXPECT_EQ(parse_timestamp("2020-02-29T19:00:00-05:00"), base);
  EXPECT_EQ(parse_timestamp("2020-03-01"), base);
  EXPECT_FALSE(parse_timestamp("2019-02-29T00:00:00Z"));
  EXPECT_FALSE(parse_timestamp("2020-03-01T25:00:00Z"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
  // month follows UTC, so an offset can move a record across a month boundary
  EXPECT_EQ(month_of(*parse_timestamp("2020-02-29T23:30:00-01:00")), YearMonth(2020, 3));
  EXPECT_EQ(format_timestamp(*base), "2020-03-01T00:00:00Z");
}

TEST(CleanedLength, StripsUrlsAndHashtags) {
  EXPECT_EQ(cleaned_length("hello world"), 11u);
  EXPECT_EQ(cleaned_length("hello https://t.co/xyz world #tag"), 11u);
  EXPECT_EQ(cleaned_length("  www.example.com  #a #b "), 0u);
  EXPECT_EQ(cleaned_length("héllo"), 5u);
}

TEST(Validate, LengthBoundary) {
  const auto cfg = test_config();
  EXPECT_EQ(reason_of(validate(raw("39"), cfg)), RejectReason::TooShort);
  EXPECT_TRUE(std::holds_alternative<Record>(validate(raw("40"), cfg)));
}

TEST(Validate, TextOverridesChars) {
  const auto cfg = test_config();
  auto r = raw("100");
  r.text = "short #hashtag http://x.y";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::TooShort);
  r.text = std::string(45, 'a');
  auto v = validate(r, cfg);
  ASSERT_TRUE(std::holds_alternative<Record>(v));
  EXPECT_EQ(std::get<Record>(v).char_count, 45u);
}

TEST(Validate, RejectionReasons) {
  const auto cfg = test_config();
  auto r = raw();
  r.country = "FRA";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::UnknownCountry);
  r = raw();
  r.country = "usa";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::UnknownCountry);
  r = raw();
  r.lang = "en";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::UnknownLanguage);
  r = raw();
  r.ts = "2018-06-30T23:59:59Z";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::OutOfRange);
  r = raw();
  r.ts = "2020-09-01T00:00:00Z";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::OutOfRange);
  r = raw();
  r.rt = "true";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::RetweetDropped);
  r = raw();
  r.rt = "maybe";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::MalformedLine);
  r = raw();
  r.chars = "-3";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::MalformedLine);
  r = raw();
  r.id.reset();
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::MalformedLine);

  auto keep = cfg;
  keep.drop_retweets = false;
  r = raw();
  r.rt = "1";
  EXPECT_TRUE(std::holds_alternative<Record>(validate(r, keep)));
}

TEST(Validate, LanguageListRestricts) {
  auto cfg = test_config();
  cfg.languages = LanguageSet({"eng", "spa"});
  auto r = raw();
  r.lang = "fra";
  EXPECT_EQ(reason_of(validate(r, cfg)), RejectReason::UnknownLanguage);
  r.lang = "spa";
  EXPECT_TRUE(std::holds_alternative<Record>(validate(r, cfg)));
}

TEST(KvLine, ParseAndEscape) {
  auto r = parse_kv_line("id=a\\tb\tts=2019-07-01T00:00:00Z\tcountry=USA\tlang=eng\tchars=50\textra=ignored");
  ASSERT_TRUE(r);
  EXPECT_EQ(*r->id, "a\tb");
  EXPECT_EQ(*r->chars, "50");
  EXPECT_FALSE(parse_kv_line("id=1\tid=2"));
  EXPECT_FALSE(parse_kv_line("just some text"));
  EXPECT_EQ(escape_kv_value("x\ty\\"), "x\\ty\\\\");
}

TEST(StreamRecords, EmptyFile) {
  std::istringstream in("");
  int n = 0;
  auto stats = stream_records(in, test_config(), [&](const Record&) { ++n; });
  EXPECT_EQ(n, 0);
  EXPECT_EQ(stats, IngestStats{});
}

TEST(StreamRecords, CsvWithHeaderAndQuotedText) {
  std::istringstream in(
      "id,ts,country,lang,text,rt\n"
      "1,2019-07-01T00:00:00Z,USA,eng,\"a long enough sentence, with a comma in it, really\",0\n"
      "2,2019-07-01T00:00:00Z,IND,hin,\"short\",0\n"
      "3,2019-07-01T00:00:00Z,IND,hin,\"unterminated,0\n");
  std::vector<std::string> ids;
  auto stats = stream_records(in, test_config(), [&](const Record& r) { ids.push_back(r.id); });
  EXPECT_EQ(ids, std::vector<std::string>{"1"});
  EXPECT_EQ(stats.lines_read, 3u);
  EXPECT_EQ(stats.count(RejectReason::TooShort), 1u);
  EXPECT_EQ(stats.count(RejectReason::MalformedLine), 1u);
}

// 1,000 lines with 100 planted defects of assorted kinds.
TEST(StreamRecords, PlantedMalformedLines) {
  std::mt19937 rng(7);
  std::vector<int> planted(1000, 0);
  for (int i = 0; i < 100; ++i) planted[i] = 1;
  std::shuffle(planted.begin(), planted.end(), rng);
  const std::vector<std::string> defects = {
      "garbage without separators", "id=1\tts=notatime\tcountry=USA\tlang=eng\tchars=50",
      "id=1\tcountry=USA\tlang=eng\tchars=50", "id=1\tts=2019-07-01T00:00:00Z\tcountry=USA\tlang=eng\tchars=lots",
      "=oops\tid=1", "id=1\tid=2\tts=2019-07-01T00:00:00Z\tcountry=USA\tlang=eng\tchars=50"};
  std::ostringstream file;
  for (int i = 0; i < 1000; ++i) {
    if (planted[i])
      file << defects[i % defects.size()] << '\n';
    else
      file << "id=" << i << "\tts=2019-07-01T00:00:00Z\tcountry=USA\tlang=eng\tchars=50\n";
  }
  std::istringstream in(file.str());
  auto stats = stream_records(in, test_config(), [](const Record&) {});
  EXPECT_EQ(stats.count(RejectReason::MalformedLine), 100u);
  EXPECT_EQ(stats.accepted, 900u);
  EXPECT_EQ(stats.lines_read, 1000u);
}

TEST(StreamRecords, AccountingAndOrderIndependence) {
  std::mt19937 rng(11);
  const std::vector<std::string> countries = {"USA", "IND", "ERI", "FRA"};
  const std::vector<std::string> langs = {"eng", "hin", "tir", "xx"};
  std::vector<std::string> lines;
  for (int i = 0; i < 2000; ++i) {
    std::ostringstream l;
    l << "id=" << i << "\tts=20" << (17 + rng() % 5) << "-0" << (1 + rng() % 9) << "-10T00:00:00Z\tcountry="
      << countries[rng() % 4] << "\tlang=" << langs[rng() % 4] << "\tchars=" << (rng() % 80) << "\trt=" << (rng() % 5 == 0);
    lines.push_back(l.str());
  }
  auto run = [&](const std::vector<std::string>& ls) {
    std::ostringstream f;
    for (const auto& l : ls) f << l << '\n';
    std::istringstream in(f.str());
    std::vector<std::string> ids;
    auto stats = stream_records(in, test_config(), [&](const Record& r) { ids.push_back(r.id); });
    std::sort(ids.begin(), ids.end());
    return std::make_pair(stats, ids);
  };
  auto [stats, ids] = run(lines);
  EXPECT_EQ(stats.accepted + stats.total_rejected(), stats.lines_read);
  EXPECT_GT(stats.accepted, 0u);
  std::shuffle(lines.begin(), lines.end(), rng);
  auto [stats2, ids2] = run(lines);
  EXPECT_EQ(ids, ids2);
  EXPECT_EQ(stats, stats2);
}

TEST(StreamRecords, MissingFileThrowsPathNotFound) {
  try {
    stream_records("/nonexistent/file.txt", test_config(), [](const Record&) {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PathNotFound);
  }
}

TEST(Registry, RejectsConflictingMapping) {
  std::istringstream ok("country,region\nUSA,America North\nCAN,America North\n");
  auto reg = CountryRegistry::read(ok);
  EXPECT_EQ(reg.size(), 2u);
  EXPECT_EQ(*reg.region_of("CAN"), "America North");
  std::istringstream bad("USA,A\nUSA,B\n");
  EXPECT_THROW(CountryRegistry::read(bad), Error);
}
