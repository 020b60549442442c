#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sepstein/antisym.hpp>
#include <sepstein/states.hpp>

#include <cmath>

using namespace sepstein;

TEST_CASE("reference constant") {
  CHECK(csw_bits() == doctest::Approx(0.5 * std::log2(4.0 / 3.0)));
  CHECK(csw_bits() == doctest::Approx(0.2075).epsilon(1e-3));
}

TEST_CASE("table rows match the closed forms and certify the gap at 13") {
  auto table = antisym_table(2, 20);
  REQUIRE(table.complete);
  REQUIRE(table.rows.size() == 19);
  double prev_upper = 2.0;
  for (const auto& row : table.rows) {
    CHECK(row.lower_bits == doctest::Approx(std::log2(1.0 + 1.0 / row.d)).epsilon(1e-6));
    CHECK(row.upper_bits == doctest::Approx(std::log2(1.0 + 2.0 / row.d)).epsilon(1e-6));
    CHECK(row.lower_bits <= row.upper_bits + 1e-6);
    CHECK(row.csw_bits == doctest::Approx(csw_bits()));
    CHECK(row.gap_certified == (row.d >= 13));
    CHECK(row.upper_bits < prev_upper);   // strictly decreasing in d
    prev_upper = row.upper_bits;
  }
  // numeric anchors either side of the threshold
  CHECK(table.rows[10].upper_bits == doctest::Approx(std::log2(7.0 / 6.0)).epsilon(1e-6));
  CHECK(table.rows[11].upper_bits == doctest::Approx(std::log2(15.0 / 13.0)).epsilon(1e-6));
  CHECK(std::log2(15.0 / 13.0) < csw_bits());
  CHECK(std::log2(7.0 / 6.0) > csw_bits());
}

TEST_CASE("rows beyond the solver cap fall back to closed forms") {
  auto table = antisym_table(250, 300);
  REQUIRE(table.complete);
  for (const auto& row : table.rows) {
    CHECK(row.analytic);
    CHECK(row.upper_bits == doctest::Approx(std::log2(1.0 + 2.0 / row.d)));
    CHECK(row.gap_certified);
  }
}

TEST_CASE("csv emission") {
  auto table = antisym_table(3, 3);
  REQUIRE(table.rows.size() == 1);
  std::string header = AntisymRow::csv_header();
  CHECK(header.find("gap_certified") != std::string::npos);
  std::string row = table.rows[0].csv_row();
  CHECK(row.substr(0, 2) == "3,");
}

TEST_CASE("fixed point states of the werner twirl") {
  int d = 2, n = 2;
  WernerFixedPoint all{n, {0, 0, 0, 1}};
  auto sa = fixed_point_state(d, all);
  Mat direct = regroup_composite(tensor(antisym_state(d), antisym_state(d)), d, d, n);
  CHECK((sa.mat() - direct).cwiseAbs().maxCoeff() < 1e-12);

  WernerFixedPoint none{n, {1, 0, 0, 0}};
  auto ss = fixed_point_state(d, none);
  Mat sdirect = regroup_composite(tensor(sym_state(d), sym_state(d)), d, d, n);
  CHECK((ss.mat() - sdirect).cwiseAbs().maxCoeff() < 1e-12);

  // the two single-factor blocks are orthogonal, so trace distance from the
  // full antisymmetric power equals the missing weight on the top subset
  WernerFixedPoint mixed{n, {0.1, 0.2, 0.3, 0.4}};
  auto sm = fixed_point_state(d, mixed);
  double td = 0.5 * trace_norm(sa.mat() - sm.mat());
  CHECK(td == doctest::Approx(1.0 - 0.4).epsilon(1e-9));

  WernerFixedPoint bad{n, {0.5, 0.1, 0.1, 0.1}};   // weights do not sum to 1
  CHECK_THROWS_AS(fixed_point_state(d, bad), std::exception);
}

TEST_CASE("one-shot smoothing stays within the fixed-point window") {
  std::vector<double> grid = {0.0, 0.1, 0.25, 0.5};
  for (auto [d, n] : {std::pair{2, 1}, std::pair{3, 1}}) {
    auto rep = stein_smoothing_check(d, n, grid);
    CHECK(rep.d == d);
    // the best dominating state is the p = 1/2 Werner state for every d
    CHECK(rep.exact_bits == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& row : rep.rows) {
      CHECK(row.slack_lo >= -1e-6);
      CHECK(row.slack_hi >= -1e-6);
      if (row.delta == 0.0)
        CHECK(row.smoothed_bits == doctest::Approx(rep.exact_bits).epsilon(1e-6));
    }
  }
}
