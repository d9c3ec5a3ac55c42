#include <gtest/gtest.h>

#include <sstream>

#include "lingdiv/synth.hpp"
#include "scenarios.hpp"

using namespace lingdiv;

TEST(Rng, KnownSplitMixSequence) {
  // first outputs of SplitMix64 seeded with 0
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(s), 0x6e789e6aa1b965f4ULL);
}

TEST(Rng, UniformInUnitInterval) {
  Xoshiro256 rng(42);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(Rng, CellSeedsDiffer) {
  EXPECT_NE(cell_seed(1, "USA", YearMonth(2019, 1)), cell_seed(1, "USA", YearMonth(2019, 2)));
  EXPECT_NE(cell_seed(1, "USA", YearMonth(2019, 1)), cell_seed(1, "NZL", YearMonth(2019, 1)));
  EXPECT_NE(cell_seed(1, "USA", YearMonth(2019, 1)), cell_seed(2, "USA", YearMonth(2019, 1)));
}

TEST(ExpectedDistribution, MixtureAndRestriction) {
  PopulationSpec spec;
  spec.country = "ERI";
  spec.groups = {{.label = "locals", .languages = {{"tir", 0.5}, {"eng", 0.5}}, .volume = 300.0},
                 {.label = "visitors", .languages = {{"eng", 1.0}}, .volume = 100.0, .nonlocal = true}};
  const auto open = expected_distribution(spec, YearMonth(2019, 5));
  EXPECT_DOUBLE_EQ(open.share("eng"), 0.625);
  const auto closed = expected_distribution(spec, YearMonth(2020, 5), 0.0);
  EXPECT_DOUBLE_EQ(closed.share("eng"), 0.5);
  spec.groups[0].volume = 0.0;
  try {
    expected_distribution(spec, YearMonth(2020, 5), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVolume);
  }
}

TEST(Scenario, Validation) {
  Scenario s;
  PopulationSpec spec;
  spec.country = "ERI";
  spec.groups = {{.label = "locals", .languages = {{"tir", 0.5}, {"eng", 0.4}}, .volume = 300.0}};
  s.populations = {spec};
  EXPECT_THROW(s.validate(), Error);
  s.populations[0].groups[0].languages["eng"] = 0.5;
  EXPECT_NO_THROW(s.validate());
  s.restriction_factor = 1.5;
  EXPECT_THROW(s.validate(), Error);
}

TEST(Generate, DeterministicForSeed) {
  const auto s = scenarios::shift_case(9, 2000.0).scenario;
  std::ostringstream r1, m1, r2, m2;
  generate(s, r1, m1);
  generate(s, r2, m2);
  EXPECT_EQ(r1.str(), r2.str());
  EXPECT_EQ(m1.str(), m2.str());
  auto other = s;
  other.seed += 1;
  std::ostringstream r3, m3;
  generate(other, r3, m3);
  EXPECT_NE(r1.str(), r3.str());
  EXPECT_EQ(m1.str(), m3.str());
}

TEST(Generate, RecordsIngestToTheGeneratedTable) {
  const auto s = scenarios::shift_case(10, 1500.0).scenario;
  std::stringstream records, manifest;
  generate(s, records, manifest);
  IngestConfig cfg;
  cfg.registry.add("SYN", "Test");
  CountTable ingested;
  const auto stats = stream_records(records, cfg, [&](const Record& r) { ingested.add(r); });
  EXPECT_EQ(stats.total_rejected(), 0u);
  EXPECT_EQ(ingested, generate_table(s));
  EXPECT_EQ(generate_table(s, 4), generate_table(s, 1));
}

TEST(Generate, EmpiricalSharesConvergeToManifest) {
  auto s = scenarios::eritrea_scenario(7);
  const auto table = generate_table(s);
  const auto& spec = s.populations.front();
  for (YearMonth m : {YearMonth(2019, 5), YearMonth(2020, 5)}) {
    const auto expected = s.expected(spec, m);
    const auto observed = distribution(table, spec.country, m);
    const double n = static_cast<double>(table.total(spec.country, m));
    EXPECT_NEAR(n, s.expected_volume(spec, m), 0.5);
    for (const auto& [lang, p] : expected.shares())
      EXPECT_NEAR(observed.share(lang), p, 5.0 * std::sqrt(p * (1 - p) / n) + 1e-12) << lang << " " << m.str();
  }
}

TEST(Generate, ManifestHeaderAndRows) {
  const auto s = scenarios::eritrea_scenario();
  std::ostringstream records, manifest;
  generate(s, records, manifest);
  std::istringstream in(manifest.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "country,month,language,expected_share,expected_hhi,expected_volume");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  // 5 languages in each of 26 months
  EXPECT_EQ(rows, 26u * 5u);
}
