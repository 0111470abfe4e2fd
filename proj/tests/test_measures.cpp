#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fpme/grid.hpp"
#include "fpme/measures.hpp"

using fpme::MeasureSpec;
using fpme::Mollifier;

TEST_CASE("mollified atom carries exactly the atom's mass", "[measures]") {
  const auto g = fpme::make_grid(1, 512, 5.0);
  MeasureSpec mu;
  mu.atoms.push_back({0.0, 0.0, 1.0});
  const auto field = fpme::mollify_measure(mu, Mollifier{0.1}, g);
  REQUIRE(std::abs(fpme::integrate(field, g) - 1.0) < 1e-10);
  for (double v : field) REQUIRE(v >= 0.0);
  // compact support: the bump vanishes beyond radius eps
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.axis_coord(i)) > 0.1 + g.h) REQUIRE(field[i] == 0.0);
  }
}

TEST_CASE("unresolvable mollification scales are rejected", "[measures]") {
  const auto g = fpme::make_grid(1, 64, 5.0);  // h = 0.15625
  MeasureSpec mu;
  mu.atoms.push_back({0.0, 0.0, 1.0});
  REQUIRE_THROWS_AS(fpme::mollify_measure(mu, Mollifier{0.25}, g), std::invalid_argument);
  REQUIRE_NOTHROW(fpme::mollify_measure(mu, Mollifier{2.0 * g.h}, g));
}

TEST_CASE("atom bumps must fit inside the box", "[measures]") {
  const auto g = fpme::make_grid(1, 256, 2.0);
  MeasureSpec mu;
  mu.atoms.push_back({1.95, 0.0, 1.0});
  REQUIRE_THROWS_AS(fpme::mollify_measure(mu, Mollifier{0.2}, g), std::invalid_argument);
}

TEST_CASE("two atoms give a bimodal field with the summed mass", "[measures]") {
  const auto g = fpme::make_grid(1, 1024, 5.0);
  MeasureSpec mu;
  mu.atoms.push_back({-1.0, 0.0, 0.3});
  mu.atoms.push_back({+1.0, 0.0, 0.7});
  const auto field = fpme::mollify_measure(mu, Mollifier{0.2}, g);
  REQUIRE(std::abs(fpme::integrate(field, g) - 1.0) < 1e-10);

  // Direct-summation oracle: each normalized bump evaluated independently.
  const auto only_a = fpme::mollify_measure([] {
        MeasureSpec m;
        m.atoms.push_back({-1.0, 0.0, 0.3});
        return m;
      }(), Mollifier{0.2}, g);
  const auto only_b = fpme::mollify_measure([] {
        MeasureSpec m;
        m.atoms.push_back({+1.0, 0.0, 0.7});
        return m;
      }(), Mollifier{0.2}, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(field[i] == Catch::Approx(only_a[i] + only_b[i]).margin(1e-12));
  }

  // Bimodal: peaks near the atoms, a gap in between.
  const auto at = [&](double x) { return field[std::size_t(std::lround((x + 5.0) / g.h))]; };
  REQUIRE(at(-1.0) > 10.0 * at(0.0));
  REQUIRE(at(1.0) > at(-1.0));
}

TEST_CASE("mollifying a pure density preserves its mass", "[measures]") {
  const auto g = fpme::make_grid(1, 512, 5.0);
  MeasureSpec mu;
  mu.density.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.axis_coord(i);
    mu.density[i] = std::exp(-x * x) * (1.0 + 0.5 * std::sin(3.0 * x));
  }
  const double mass0 = fpme::integrate(mu.density, g);
  const auto field = fpme::mollify_measure(mu, Mollifier{0.15}, g);
  REQUIRE(fpme::integrate(field, g) == Catch::Approx(mass0).epsilon(1e-12));
  for (double v : field) REQUIRE(v >= 0.0);
}

TEST_CASE("weak-star gap of a measure against itself is zero", "[measures]") {
  const auto g = fpme::make_grid(1, 256, 5.0);
  MeasureSpec mu;
  mu.atoms.push_back({0.5, 0.0, 2.0});
  const auto bank = fpme::default_test_bank(g);
  REQUIRE(fpme::weakstar_gap(mu, mu, bank, g) == 0.0);
}

TEST_CASE("weak-star gap between an atom and its mollification shrinks with eps",
          "[measures]") {
  const auto g = fpme::make_grid(1, 2048, 5.0);
  MeasureSpec atom;
  atom.atoms.push_back({0.0, 0.0, 1.0});
  const auto bank = fpme::default_test_bank(g);
  double prev = 1e100;
  for (double eps : {0.4, 0.2, 0.1}) {
    MeasureSpec smeared;
    smeared.density = fpme::mollify_measure(atom, Mollifier{eps}, g);
    const double gap = fpme::weakstar_gap(atom, smeared, bank, g);
    REQUIRE(gap < prev);
    prev = gap;
  }
  REQUIRE(prev < 2e-2);
}

TEST_CASE("weak-star gap sees a mass mismatch through the constant test function",
          "[measures]") {
  const auto g = fpme::make_grid(1, 256, 5.0);
  MeasureSpec a, b;
  a.atoms.push_back({0.0, 0.0, 1.0});
  b.atoms.push_back({0.0, 0.0, 1.25});
  const std::vector<fpme::Field> constant_bank{fpme::Field(g.size(), 1.0)};
  REQUIRE(fpme::weakstar_gap(a, b, constant_bank, g) == Catch::Approx(0.25).epsilon(1e-12));
  REQUIRE(fpme::weakstar_gap(a, b, fpme::default_test_bank(g), g) >= 0.25 - 1e-12);
}

TEST_CASE("total mass adds atoms and density", "[measures]") {
  const auto g = fpme::make_grid(1, 128, 2.0);
  MeasureSpec mu;
  mu.atoms.push_back({0.0, 0.0, 0.5});
  mu.density.assign(g.size(), 1.0);  // integral 4
  REQUIRE(mu.total_mass(g) == Catch::Approx(4.5));
}
