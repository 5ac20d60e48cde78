#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "mdheston/run_config.hpp"
#include "mdheston/table.hpp"

using namespace mdheston;
using nlohmann::json;

TEST(Table, NumbersRoundTripBitwise) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(mant(rng), expo(rng));
    const double back = parse_number(format_number(v));
    EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0) << format_number(v);
  }
  EXPECT_TRUE(std::isnan(parse_number(format_number(std::nan("")))));
  EXPECT_EQ(parse_number(format_number(-HUGE_VAL)), -HUGE_VAL);
  EXPECT_THROW(parse_number("1.5x"), std::invalid_argument);
}

TEST(Table, CsvRoundTrip) {
  Table t;
  t.header = {{"command", "price"}, {"config", R"({"a":[1,2],"b":"x, y"})"}};
  t.columns = {"t", "k", "status"};
  t.rows = {{format_number(0.1), format_number(-1e-300), "ok"},
            {format_number(1.0 / 3.0), "nan", "fourier: no admissible contour, \"quoted\""}};
  EXPECT_EQ(from_csv(to_csv(t)), t);
}

TEST(Table, CsvRejectsRaggedRows) {
  EXPECT_THROW(from_csv("a,b\n1,2,3\n"), std::invalid_argument);
  EXPECT_THROW(from_csv(""), std::invalid_argument);
}

TEST(RunConfig, DefaultsAndOverrides) {
  const auto c = parse_run_config(json::parse(R"({
    "heston": {"kappa": 2.0, "rho": 0.1},
    "law": {"name": "uniform", "params": {"a": 1, "b": 2}},
    "t_grid": [0.1, 0.2],
    "mc": {"paths": 1000, "scheme": "exact_cir"},
    "seed": 9, "jobs": 2, "format": "json"
  })"));
  EXPECT_EQ(c.kappa, 2.0);
  EXPECT_EQ(c.theta, 0.04);
  EXPECT_EQ(c.rho, 0.1);
  EXPECT_EQ(c.t_grid, (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(c.mc_paths, 1000u);
  EXPECT_EQ(c.mc_scheme, McScheme::exact_cir);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.jobs, 2u);
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(make_law(c.law).name(), "uniform");
  // The emitted configuration parses back to the same values.
  const auto again = parse_run_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
}

TEST(RunConfig, UnknownKeysRejected) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"tgrid": [1]})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"heston": {"kapa": 1}})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"mc": {"paths": 10, "threads": 2}})")), ConfigError);
  const auto c = parse_run_config(json::parse(R"({"law": {"name": "gamma", "params": {"shape": 2, "scale": 1}}})"));
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(RunConfig, InvalidValuesRejected) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"t_grid": []})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"t_grid": ["a"]})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"mc": {"paths": 0}})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"mc": {"scheme": "milstein"}})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"heston": {"xi": "big"}})")), ConfigError);
  EXPECT_THROW(validate(parse_run_config(json::parse(R"({"heston": {"xi": -1}})"))), ConfigError);
  EXPECT_THROW(validate(parse_run_config(json::parse(R"({"t_grid": [0]})"))), ConfigError);
  EXPECT_THROW(validate(parse_run_config(json::parse(R"({"g": {"beta": 0.5}})"))), ConfigError);
  EXPECT_THROW(validate(parse_run_config(json::parse(R"({"format": "xml"})"))), ConfigError);
  EXPECT_THROW(validate(parse_run_config(json::parse(R"({"law": {"name": "cauchy"}})"))), ConfigError);
  EXPECT_THROW(validate(parse_run_config(json::parse(R"({"law": {"name": "uniform", "params": {"a": 2, "b": 1}}})"))),
               ConfigError);
}
