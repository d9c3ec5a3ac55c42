#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "lingdiv/count_table.hpp"
#include "oracles.hpp"

using namespace lingdiv;

namespace {

std::vector<Record> random_records(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> countries = {"USA", "IND", "ERI", "BEL", "NZL"};
  const std::vector<std::string> langs = {"eng", "spa", "hin", "fra", "nld", "tir"};
  std::vector<Record> out(n);
  for (auto& r : out) {
    r.country = countries[rng() % countries.size()];
    r.language = langs[rng() % langs.size()];
    r.month = YearMonth(2019, 1) + static_cast<int>(rng() % 18);
  }
  return out;
}

CountTable random_table(unsigned seed, std::size_t n = 500) {
  CountTable t;
  for (const auto& r : random_records(n, seed)) accumulate(t, r);
  return t;
}

}  // namespace

TEST(Accumulate, SingleRecord) {
  CountTable t;
  Record r;
  r.country = "USA";
  r.month = YearMonth(2019, 7);
  r.language = "eng";
  accumulate(t, r);
  ASSERT_NE(t.find("USA", YearMonth(2019, 7)), nullptr);
  EXPECT_EQ(t.find("USA", YearMonth(2019, 7))->counts.at("eng"), 1u);
  EXPECT_EQ(t.total("USA", YearMonth(2019, 7)), 1u);
  EXPECT_EQ(t.grand_total(), 1u);
}

TEST(Accumulate, ManyLanguagesOneCell) {
  CountTable t;
  const std::vector<std::string> langs = {"eng", "spa", "fra"};
  for (int i = 0; i < 30; ++i) t.add("USA", YearMonth(2019, 7), langs[i % 3]);
  const Cell* c = t.find("USA", YearMonth(2019, 7));
  EXPECT_EQ(c->total, 30u);
  EXPECT_EQ(c->counts.size(), 3u);
}

TEST(Accumulate, MatchesBruteForceTally) {
  const auto records = random_records(5000, 3);
  CountTable t;
  oracle::Tally tally;
  for (const auto& r : records) {
    accumulate(t, r);
    ++tally[{r.country, r.month.index(), r.language}];
  }
  std::size_t cells = 0;
  for (const auto& [country, months] : t.data())
    for (const auto& [m, cell] : months) {
      std::uint64_t sum = 0;
      for (const auto& [lang, n] : cell.counts) {
        EXPECT_EQ(n, (tally[{country, m.index(), lang}]));
        sum += n;
        ++cells;
      }
      EXPECT_EQ(sum, cell.total);
    }
  EXPECT_EQ(cells, tally.size());
}

TEST(Merge, IdentityCommutativityAssociativity) {
  const auto a = random_table(1), b = random_table(2), c = random_table(3);
  EXPECT_EQ(merge(a, CountTable{}), a);
  EXPECT_EQ(merge(CountTable{}, a), a);
  for (unsigned s = 0; s < 20; ++s) {
    const auto x = random_table(100 + s), y = random_table(200 + s);
    EXPECT_EQ(merge(x, y), merge(y, x));
  }
  EXPECT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
  EXPECT_EQ(merge(a, b).grand_total(), a.grand_total() + b.grand_total());
}

TEST(Merge, ParallelShardsEqualSingleStream) {
  const auto records = random_records(20000, 9);
  CountTable single;
  for (const auto& r : records) accumulate(single, r);

  constexpr std::size_t kShards = 4;
  std::vector<CountTable> shards(kShards);
  {
    std::vector<std::jthread> workers;
    for (std::size_t s = 0; s < kShards; ++s)
      workers.emplace_back([&, s] {
        for (std::size_t i = s; i < records.size(); i += kShards) accumulate(shards[s], records[i]);
      });
  }
  CountTable merged;
  for (const auto& s : shards) merged.merge(s);
  EXPECT_EQ(merged, single);
}

TEST(Distribution, OneMonth) {
  CountTable t;
  t.add("USA", YearMonth(2019, 7), "eng", 3);
  t.add("USA", YearMonth(2019, 7), "spa", 1);
  const auto d = distribution(t, "USA", YearMonth(2019, 7));
  EXPECT_DOUBLE_EQ(d.share("eng"), 0.75);
  EXPECT_DOUBLE_EQ(d.share("spa"), 0.25);
  EXPECT_EQ(d.support_count(), 4u);
}

TEST(Distribution, PoolingIsCountWeighted) {
  CountTable t;
  t.add("BEL", YearMonth(2019, 7), "fra", 30);
  t.add("BEL", YearMonth(2019, 8), "nld", 10);
  t.add("BEL", YearMonth(2019, 8), "eng", 60);
  const auto d = distribution(t, "BEL", MonthSet{YearMonth(2019, 7), YearMonth(2019, 8)});
  // hand tally: 30 fra, 10 nld, 60 eng out of 100
  EXPECT_DOUBLE_EQ(d.share("fra"), 0.30);
  EXPECT_DOUBLE_EQ(d.share("nld"), 0.10);
  EXPECT_DOUBLE_EQ(d.share("eng"), 0.60);
  EXPECT_EQ(d.size(), 3u);
}

TEST(Distribution, EmptyCellThrows) {
  CountTable t;
  t.add("USA", YearMonth(2019, 7), "eng");
  try {
    distribution(t, "USA", YearMonth(2019, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCell);
  }
  EXPECT_THROW(distribution(t, "IND", YearMonth(2019, 7)), Error);
}

TEST(Distribution, SharesSumToOneAndPoolingMatchesMerge) {
  for (unsigned s = 0; s < 20; ++s) {
    const auto a = random_table(s), b = random_table(s + 50);
    for (const auto& country : merge(a, b).countries()) {
      const auto months = merge(a, b).months(country);
      const auto d = distribution(merge(a, b), country, months);
      double sum = 0.0;
      for (const auto& [_, v] : d.shares()) {
        EXPECT_GT(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
      // pooled counts of the merged table equal the sum of each part's pooled counts
      auto pa = pooled_counts(a, country, months), pb = pooled_counts(b, country, months);
      for (const auto& [lang, n] : d.counts()) {
        const std::uint64_t na = pa.count(lang) ? pa.at(lang) : 0;
        const std::uint64_t nb = pb.count(lang) ? pb.at(lang) : 0;
        EXPECT_EQ(n, na + nb);
      }
    }
  }
}

TEST(Distribution, DominantShareFromTableProportions) {
  // A USA-like corpus with a 92.3% top language.
  CountTable t;
  const std::vector<std::pair<std::string, std::uint64_t>> parts = {
      {"eng", 9230}, {"spa", 260}, {"fra", 60}, {"por", 60}, {"jpn", 40}};
  for (int m = 1; m <= 12; ++m) {
    for (const auto& [lang, n] : parts) t.add("USA", YearMonth(2019, m), lang, n);
    for (int k = 0; k < 35; ++k) t.add("USA", YearMonth(2019, m), "q" + std::string(1, 'a' + k % 26) + std::string(1, 'a' + k / 26), 10);
  }
  const auto d = distribution(t, "USA", t.months("USA"));
  EXPECT_NEAR(d.ranked().front().second, 0.923, 1e-9);
}

TEST(RegionShares, SingleCountry) {
  CountryRegistry reg;
  reg.add("USA", "America, North");
  reg.add("IND", "Asia, South");
  CountTable t;
  for (int m = 1; m <= 6; ++m) t.add("USA", YearMonth(2020, m), "eng", 10 * m);
  const auto r = region_shares(t, reg);
  for (const auto& [m, row] : r.shares) {
    EXPECT_DOUBLE_EQ(row.at("America, North"), 1.0);
    EXPECT_DOUBLE_EQ(row.at("Asia, South"), 0.0);
  }
}

TEST(RegionShares, UnmappedCountryThrows) {
  CountryRegistry reg;
  reg.add("USA", "America, North");
  CountTable t;
  t.add("FRA", YearMonth(2020, 1), "fra");
  try {
    region_shares(t, reg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnmappedCountry);
  }
}

TEST(RegionShares, MatchesGroupByOracle) {
  CountryRegistry reg;
  reg.add("USA", "North");
  reg.add("NZL", "Oceania");
  reg.add("IND", "South Asia");
  reg.add("ERI", "Africa");
  reg.add("BEL", "Europe");
  const auto t = random_table(77, 4000);
  const auto r = region_shares(t, reg);
  std::map<YearMonth, std::map<std::string, double>> counts;
  std::map<YearMonth, double> totals;
  for (const auto& [country, months] : t.data())
    for (const auto& [m, cell] : months) {
      counts[m][*reg.region_of(country)] += cell.total;
      totals[m] += cell.total;
    }
  for (const auto& [m, row] : r.shares) {
    double sum = 0.0;
    for (const auto& [region, share] : row) {
      EXPECT_NEAR(share, counts[m][region] / totals[m], 1e-15);
      sum += share;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

// Regional volumes drawn in proportion to N reproduce the expected percentage column.
TEST(RegionShares, ReproducesRegionalDistribution) {
  const std::vector<std::tuple<std::string, std::string, double, double>> regions = {
      {"ZAF", "Africa, Southern", 12.28, 2.0}, {"NGA", "Africa, Sub", 43.87, 7.0},
      {"EGY", "Africa, North", 16.60, 2.7},    {"BRA", "America, Brazil", 10.96, 1.8},
      {"MEX", "America, Central", 66.12, 10.6}, {"USA", "America, North", 24.64, 4.0},
      {"ARG", "America, South", 77.79, 12.5},  {"JPN", "Asia, East", 15.88, 2.6},
      {"KAZ", "Asia, Central", 15.08, 2.4},    {"IND", "Asia, South", 30.06, 4.8},
      {"IDN", "Asia, Southeast", 31.88, 5.1},  {"POL", "Europe, East", 51.48, 8.3},
      {"RUS", "Europe, Russia", 9.38, 1.5},    {"FRA", "Europe, West", 155.74, 25.0},
      {"SAU", "Middle East", 36.58, 5.9},      {"AUS", "Oceania", 24.92, 4.0}};
  CountryRegistry reg;
  std::vector<double> weights;
  for (const auto& [c, r, n, _] : regions) {
    reg.add(c, r);
    weights.push_back(n);
  }
  std::mt19937_64 rng(2020);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  CountTable t;
  for (int m = 0; m < 26; ++m)
    for (int i = 0; i < 40000; ++i) t.add(std::get<0>(regions[pick(rng)]), YearMonth(2018, 7) + m, "eng");
  const auto r = region_shares(t, reg);
  for (const auto& [c, region, n, data_pct] : regions) EXPECT_NEAR(r.overall.at(region) * 100.0, data_pct, 0.5) << region;
  EXPECT_NEAR(r.overall.at("Oceania"), 0.040, 0.005);
}

TEST(Serialization, RoundTripIsLossless) {
  for (unsigned s = 0; s < 5; ++s) {
    const auto t = random_table(s, 3000);
    std::stringstream buf;
    t.write(buf);
    const auto back = CountTable::read(buf);
    EXPECT_EQ(back, t);
    std::stringstream again;
    back.write(again);
    std::stringstream first;
    t.write(first);
    EXPECT_EQ(first.str(), again.str());
  }
}

TEST(Serialization, RejectsBadRows) {
  std::istringstream in("country,month,language,count\nUSA,2019-13,eng,5\n");
  EXPECT_THROW(CountTable::read(in), Error);
}
