#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bowen_press/families.hpp"
#include "oracles.hpp"

using namespace bowen;

namespace {

constexpr double kPi = std::numbers::pi;

double finite_difference_log_sph(const FamilySpec& spec, cplx w) {
  const cplx h(1e-7, 0.0);
  const cplx fw = evaluate(spec, w).value();
  const cplx fh = evaluate(spec, w + h).value();
  return std::log(test::chord_distance(fh, fw) / test::chord_distance(w + h, w));
}

}  // namespace

TEST_CASE("FamilySpec rejects a zero parameter for exp and tan") {
  CHECK_THROWS_AS(FamilySpec::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(FamilySpec::tangent(0.0), std::invalid_argument);
  CHECK_NOTHROW(FamilySpec::quadratic(0.0));
  CHECK(parse_family_kind("exp") == FamilyKind::exponential);
  CHECK(parse_family_kind("tan") == FamilyKind::tangent);
  CHECK(parse_family_kind("quad") == FamilyKind::quadratic);
  CHECK_THROWS(parse_family_kind("sine"));
}

TEST_CASE("evaluate: trivial values") {
  CHECK(evaluate(FamilySpec::exponential(1.0), 0.0).value() == cplx(1.0, 0.0));
  CHECK(evaluate(FamilySpec::tangent(0.5), 0.0).value() == cplx(0.0, 0.0));
  CHECK(evaluate(FamilySpec::quadratic(0.0), 2.0).value() == cplx(4.0, 0.0));
  CHECK(evaluate(FamilySpec::tangent(0.5), kPi / 2).is_infinite());
  CHECK(evaluate(FamilySpec::quadratic(0.3), ExtendedPoint::infinity()).is_infinite());
  CHECK_THROWS_AS(evaluate(FamilySpec::exponential(1.0), ExtendedPoint::infinity()), std::domain_error);
}

TEST_CASE("singular values") {
  const SingularData e = singular_values(FamilySpec::exponential(0.2));
  REQUIRE(e.singular_values.size() == 1);
  CHECK(e.singular_values[0] == ExtendedPoint(0.0));
  CHECK(e.omitted_values.size() == 1);
  CHECK(e.tags[0] == "asymptotic");

  const SingularData t = singular_values(FamilySpec::tangent(0.5));
  REQUIRE(t.singular_values.size() == 2);
  CHECK(t.singular_values[0] == ExtendedPoint(cplx(0.0, 0.5)));
  CHECK(t.singular_values[1] == ExtendedPoint(cplx(0.0, -0.5)));

  const SingularData q = singular_values(FamilySpec::quadratic(0.1));
  REQUIRE(q.singular_values.size() == 2);
  CHECK(q.singular_values[0] == ExtendedPoint(0.1));
  CHECK(q.singular_values[1].is_infinite());
  CHECK(q.tags[0] == "critical");
}

TEST_CASE("inverse branches of exp at z = 1 lie on 2 pi i k") {
  const FamilySpec spec = FamilySpec::exponential(1.0);
  const BranchSet set = inverse_branches(spec, 1.0, 2, 1.0);
  REQUIRE(set.branches.size() == 5);
  for (const InverseBranch& b : set.branches) {
    const double k = static_cast<double>(b.index);
    CHECK(std::abs(b.point.value() - cplx(0.0, 2 * kPi * k)) <= 1e-14);
    CHECK(std::exp(b.sph_deriv.log_magnitude) == doctest::Approx((1 + 4 * kPi * kPi * k * k) / 2).epsilon(1e-13));
    CHECK(sph_distance(evaluate(spec, b.point), 1.0) < 1e-10);
  }
}

TEST_CASE("inverse branches of z^2 at 4") {
  const BranchSet set = inverse_branches(FamilySpec::quadratic(0.0), 4.0, 1, 1.0);
  REQUIRE(set.branches.size() == 2);
  CHECK(set.branches[0].point.value() == cplx(2.0, 0.0));
  CHECK(set.branches[1].point.value() == cplx(-2.0, 0.0));
  // Euclidean |f'| = 4; spherical factor (1+4)/(1+16)
  for (const auto& b : set.branches)
    CHECK(std::exp(b.sph_deriv.log_magnitude) == doctest::Approx(4.0 * 5.0 / 17.0).epsilon(1e-14));
}

TEST_CASE("omitted values yield an empty branch list") {
  for (cplx z : {cplx(0.0, 0.5), cplx(0.0, -0.5)}) {
    const BranchSet set = inverse_branches(FamilySpec::tangent(0.5), z, 3, 1.0);
    CHECK(set.omitted);
    CHECK(set.branches.empty());
  }
  CHECK(inverse_branches(FamilySpec::exponential(0.2), 0.0, 3, 1.0).omitted);
}

TEST_CASE("tail below one half is divergent") {
  const BranchSet set = inverse_branches(FamilySpec::exponential(1.0), 1.0, 5, 0.4);
  CHECK(set.tail.divergent);
  CHECK(std::isinf(set.tail.log_tail_upper));
  CHECK(level_divergence_threshold(FamilySpec::tangent(0.5)) == 0.5);
  CHECK(level_divergence_threshold(FamilySpec::quadratic(0.0)) == 0.0);
}

TEST_CASE("property: branch round trip and finite-difference derivative") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (const FamilySpec& spec : {FamilySpec::exponential(cplx(0.2, 0.0)), FamilySpec::exponential(cplx(-1.0, 0.5)),
                                 FamilySpec::tangent(0.5), FamilySpec::tangent(cplx(1.0, 0.3)),
                                 FamilySpec::quadratic(cplx(-0.5, 0.2))}) {
    for (int i = 0; i < 100; ++i) {
      const cplx z(u(rng), u(rng));
      const BranchSet set = inverse_branches(spec, z, 6, 1.0);
      for (const InverseBranch& b : set.branches) {
        CHECK(sph_distance(evaluate(spec, b.point), z) < 1e-10);
        const double fd = finite_difference_log_sph(spec, b.point.value());
        CHECK(std::abs(b.sph_deriv.log_magnitude - fd) <= 1e-6);
      }
    }
  }
}

TEST_CASE("property: tail bounds bracket the extra mass out to 4K") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const FamilySpec& spec : {FamilySpec::exponential(0.2), FamilySpec::exponential(1.0), FamilySpec::tangent(0.5)}) {
    for (double t : {0.6, 1.0, 1.5, 2.0}) {
      for (int i = 0; i < 20; ++i) {
        const cplx z(u(rng), u(rng));
        const auto lattice = sheet_lattice(spec, z);
        REQUIRE(lattice);
        for (int cutoff : {1, 4, 16}) {
          const BranchSet set = inverse_branches(spec, z, cutoff, t);
          const long double inner = spec.kind() == FamilyKind::exponential
                                        ? test::exp_level_sum(spec.parameter(), z, t, cutoff)
                                        : test::tan_level_sum(spec.parameter(), z, t, cutoff);
          const long double outer = spec.kind() == FamilyKind::exponential
                                        ? test::exp_level_sum(spec.parameter(), z, t, 4L * cutoff)
                                        : test::tan_level_sum(spec.parameter(), z, t, 4L * cutoff);
          const double extra = static_cast<double>(outer - inner);
          CHECK(extra <= std::exp(set.tail.log_tail_upper) * (1 + 1e-12));
          // the full tail, to 10^5 sheets, sits above the lower bound
          if (t >= 1.0) {
            const long double far = spec.kind() == FamilyKind::exponential
                                        ? test::exp_level_sum(spec.parameter(), z, t, 100000)
                                        : test::tan_level_sum(spec.parameter(), z, t, 100000);
            CHECK(static_cast<double>(far - inner) >= std::exp(log_lattice_tail_lower(*lattice, cutoff, t)) * (1 - 1e-9));
          }
        }
      }
    }
  }
}

TEST_CASE("postsingular orbit of 0.2 exp converges to the attracting fixed point") {
  const FamilySpec spec = FamilySpec::exponential(0.2);
  const OrbitTable table = postsingular_orbit(spec, 4);
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[0][0] == ExtendedPoint(0.0));
  CHECK(table.rows[1][0].value().real() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(table.rows[2][0].value().real() == doctest::Approx(0.2 * std::exp(0.2)).epsilon(1e-14));
  CHECK(table.rows[2][0].value().real() == doctest::Approx(0.2443).epsilon(1e-4));
  for (std::size_t n = 0; n + 1 < table.rows.size(); ++n)
    CHECK(table.rows[n + 1][0] == evaluate(spec, table.rows[n][0]));
  const double fixed = test::exp_fixed_point(0.2);
  const OrbitTable deep = postsingular_orbit(spec, 60);
  CHECK(std::abs(deep.rows.back()[0].value() - fixed) < 1e-12);
}

TEST_CASE("postsingular orbit of 0.5 tan stays on the imaginary axis") {
  const OrbitTable table = postsingular_orbit(FamilySpec::tangent(0.5), 3);
  const double y1 = 0.5 * std::tanh(0.5);
  CHECK(std::abs(table.rows[1][0].value() - cplx(0.0, y1)) < 1e-15);
  CHECK(std::abs(table.rows[2][0].value() - cplx(0.0, 0.5 * std::tanh(y1))) < 1e-15);
  CHECK(std::abs(table.rows[2][1].value() + table.rows[2][0].value()) < 1e-15);
}

TEST_CASE("postsingular orbit of z^2 is fixed at 0, infinity escaped") {
  const OrbitTable table = postsingular_orbit(FamilySpec::quadratic(0.0), 3);
  for (const auto& row : table.rows) CHECK(row[0] == ExtendedPoint(0.0));
  CHECK(table.escaped[0][1]);
  CHECK_FALSE(table.escaped[2][0]);
}

TEST_CASE("escaping singular orbit is flagged") {
  const OrbitTable table = postsingular_orbit(FamilySpec::exponential(3.0), 6);
  CHECK(table.escaped.back()[0]);
}

TEST_CASE("gps: attracting fixed point is not GPS") {
  const FamilySpec spec = FamilySpec::exponential(0.2);
  const GPSReport rep = gps_check(test::exp_fixed_point(0.2), postsingular_orbit(spec, 32));
  CHECK_FALSE(rep.consistent_with_gps);
  CHECK(rep.distances.back() < 1e-10);
  CHECK(rep.slopes.back() > 0.5);
  const GPSReport near = gps_check(0.2592, postsingular_orbit(spec, 32));
  CHECK_FALSE(near.consistent_with_gps);
}

TEST_CASE("gps: far point has slopes tending to zero") {
  const GPSReport rep = gps_check(cplx(10.0, kPi), postsingular_orbit(FamilySpec::exponential(0.2), 32));
  CHECK(rep.consistent_with_gps);
  CHECK_FALSE(rep.in_postsingular_set);
  CHECK(rep.distances.back() > 0.1);
  CHECK(std::abs(rep.slopes.back()) < std::abs(rep.slopes.front()));
}

TEST_CASE("gps: a postsingular point has distance 0; depth 1 gives one distance") {
  const GPSReport in = gps_check(0.2, postsingular_orbit(FamilySpec::exponential(0.2), 5));
  CHECK(in.in_postsingular_set);
  CHECK_FALSE(in.consistent_with_gps);
  const GPSReport one = gps_check(cplx(1, 1), postsingular_orbit(FamilySpec::exponential(0.2), 1));
  REQUIRE(one.distances.size() == 1);
  CHECK(one.distances[0] > 0.0);
}

TEST_CASE("property: gps distances are non-increasing") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const FamilySpec& spec : {FamilySpec::exponential(0.2), FamilySpec::tangent(0.5), FamilySpec::quadratic(-1.0)}) {
    const OrbitTable table = postsingular_orbit(spec, 20);
    for (int i = 0; i < 50; ++i) {
      const GPSReport rep = gps_check(cplx(u(rng), u(rng)), table);
      for (std::size_t n = 1; n < rep.distances.size(); ++n) CHECK(rep.distances[n] <= rep.distances[n - 1]);
    }
  }
}

TEST_CASE("hyperbolicity probe") {
  const HyperbolicityReport good = hyperbolicity_probe(FamilySpec::exponential(0.2), 64);
  CHECK(good.attracting_cycles_found);
  REQUIRE(good.orbits.size() == 1);
  CHECK(good.orbits[0].period == 1);
  CHECK(std::abs(good.orbits[0].cycle[0] - test::exp_fixed_point(0.2)) < 1e-8);
  CHECK(good.orbits[0].multiplier_modulus < 1.0);

  const HyperbolicityReport bad = hyperbolicity_probe(FamilySpec::exponential(3.0), 64);
  CHECK_FALSE(bad.attracting_cycles_found);
  CHECK(bad.orbits[0].escaped);

  const HyperbolicityReport quad = hyperbolicity_probe(FamilySpec::quadratic(0.0), 32);
  CHECK(quad.attracting_cycles_found);
  CHECK(quad.orbits[0].cycle[0] == cplx(0.0, 0.0));
  CHECK(quad.orbits[0].multiplier_modulus == 0.0);
  CHECK_THROWS(hyperbolicity_probe(FamilySpec::quadratic(0.0), 5));
}
