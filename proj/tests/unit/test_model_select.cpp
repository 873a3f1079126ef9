#include "ppfa/error.hpp"
#include "ppfa/model_select.hpp"

#include <doctest.h>

using namespace ppfa;

TEST_CASE("detection and false alarm rates")
{
  CHECK(fdr(9, 1) == doctest::Approx(0.9));
  CHECK(fdr(5, 0) == 1.0);
  CHECK(fdr(0, 4) == 0.0);
  CHECK(far(2, 98) == doctest::Approx(0.02));
  CHECK(far(0, 10) == 0.0);
  CHECK(far(3, 0) == 1.0);
  CHECK_THROWS_AS(fdr(0, 0), Error);
  CHECK_THROWS_AS(far(0, 0), Error);
}

TEST_CASE("injected deviations")
{
  const Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(100, 3);
  const Eigen::Vector3d sd(1.0, 2.0, 0.5);
  InjectionSpec spec;
  spec.seed = 4;
  const InjectedData inj = inject_deviations(raw, sd, spec);
  for (Index k = 0; k < 50; ++k) {
    CHECK_FALSE(inj.faulty[k]);
    CHECK(inj.data.row(k).isZero(0.0));
  }
  // Three segments of the window [50, 100), each shifting one channel by
  // magnitude × that channel's sd.
  const std::array<std::pair<Index, Index>, 3> segs{{{50, 66}, {66, 83}, {83, 100}}};
  for (std::size_t g = 0; g < 3; ++g) {
    const auto [begin, end] = segs[g];
    for (Index k = begin; k < end; ++k) {
      CHECK(inj.faulty[k]);
      Index nonzero = 0;
      for (Index c = 0; c < 3; ++c) {
        if (inj.data(k, c) != 0.0) {
          ++nonzero;
          CHECK(inj.data(k, c) == doctest::Approx(spec.magnitudes[g] * sd(c)));
        }
      }
      CHECK(nonzero == 1);
    }
  }
  CHECK(inject_deviations(raw, sd, spec).data == inj.data);
}

TEST_CASE("detection counting uses any statistic")
{
  MonitorReport rep;
  rep.rows.resize(4);
  rep.rows[0].flag_di = true;
  rep.rows[2].flag_spe = true;
  const DetectionCounts c = count_detections(rep, {false, false, true, true});
  CHECK(c.fp == 1);
  CHECK(c.tn == 1);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK_THROWS_AS(count_detections(rep, {true}), Error);
}

TEST_CASE("ranking of pairs")
{
  ScoreRow a{1, 2, 0.9, 0.01};
  ScoreRow b{2, 1, 0.9, 0.01};
  ScoreRow c{2, 2, 0.95, 0.01};
  ScoreRow d{1, 1, 0.9, 0.01};
  CHECK(better_pair(c, a));
  CHECK(better_pair(d, a));
  CHECK(better_pair(b, a)); // equal r·s, smaller s
  CHECK_FALSE(better_pair(a, b));
}

TEST_CASE("selection over a grid")
{
  const ModelParams truth = random_stable_model(5, 2, 2, 0.25, 6);
  const Eigen::MatrixXd raw = simulate(truth, 1500, 6).observations;
  EmConfig em;
  em.max_iterations = 10;
  em.seed = 3;

  SUBCASE("single pair")
  {
    SelectionGrid grid;
    grid.r_candidates = {2};
    grid.s_candidates = {1};
    const SelectionResult res = select(raw, grid, em, 0.99);
    CHECK(res.r == 2);
    CHECK(res.s == 1);
    REQUIRE(res.scoreboard.size() == 1);
    CHECK(res.scoreboard[0].fdr >= 0.0);
    CHECK(res.scoreboard[0].fdr <= 1.0);
    CHECK(res.scoreboard[0].far >= 0.0);
    CHECK(res.scoreboard[0].far <= 1.0);
  }
  SUBCASE("scoreboard size counts skipped pairs out")
  {
    SelectionGrid grid;
    grid.r_candidates = {1, 6};
    grid.s_candidates = {1, 2};
    const SelectionResult res = select(raw, grid, em, 0.99);
    CHECK(res.skipped.size() == 2); // r = 6 exceeds the 5 channels
    CHECK(res.scoreboard.size() == 2);
    CHECK(res.r == 1);
  }
  SUBCASE("every pair failing is an error")
  {
    SelectionGrid grid;
    grid.r_candidates = {7};
    grid.s_candidates = {1};
    CHECK_THROWS_AS(select(raw, grid, em, 0.99), Error);
  }
  SUBCASE("validation block too short")
  {
    SelectionGrid grid;
    CHECK_THROWS_AS(select(raw.topRows(900), grid, em, 0.99), Error);
  }
  SUBCASE("reproducible given the seed")
  {
    SelectionGrid grid;
    grid.r_candidates = {1, 2};
    grid.s_candidates = {2};
    const SelectionResult a = select(raw, grid, em, 0.99);
    const SelectionResult b = select(raw, grid, em, 0.99);
    REQUIRE(a.scoreboard.size() == b.scoreboard.size());
    for (std::size_t i = 0; i < a.scoreboard.size(); ++i) {
      CHECK(a.scoreboard[i].fdr == b.scoreboard[i].fdr);
      CHECK(a.scoreboard[i].far == b.scoreboard[i].far);
      CHECK(a.scoreboard[i].log_likelihood == b.scoreboard[i].log_likelihood);
    }
  }
}
