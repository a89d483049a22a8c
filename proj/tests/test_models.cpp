#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <fraccomp/models.hpp>

using namespace fraccomp;
using cd = std::complex<double>;

namespace {

// Independent oracle: the printed closed forms evaluated with std::pow on
// complex arguments (principal branch), at s = j*omega or s = -j*omega.
cd oracle_eval(Model m, const std::vector<double>& t, double omega, bool conjugate_s = false) {
  const cd s = conjugate_s ? cd(0.0, -omega) : cd(0.0, omega);
  const auto sp = [&](double a) { return std::pow(s, cd(a, 0.0)); };
  switch (m) {
    case Model::A: return t[0] * sp(t[1] - 1.0);
    case Model::B: return t[1] * sp(t[2] - 1.0) / (1.0 + t[0] * t[1] * s);
    case Model::C: return (t[0] * t[0] * sp(t[1])) / (t[0] * sp(t[1]) + t[0] * s);
    case Model::D:
      return (t[1] * t[1] * sp(t[2])) / (t[1] * s + t[1] * sp(t[2]) + t[0] * t[1] * t[1] * sp(t[2] + 1.0));
    case Model::E:
      return (1.0 + (t[0] + t[1]) * t[2] * sp(t[3] - 1.0)) / (t[0] * (1.0 + t[1] * t[2] * sp(t[3])));
    case Model::F: {
      cd num = t[0], den = 1.0;
      for (int n = 0; n < 4; ++n) {
        num *= t[1 + n] * (s + t[5 + n]);
        den *= t[5 + n] * (s + t[1 + n]);
      }
      return num / den;
    }
    case Model::G: return t[1] / (1.0 + t[0] * t[1] * s);
  }
  return {};
}

std::vector<double> random_theta(Model m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto mag = [&] { return std::exp(std::log(0.02) + u(rng) * std::log(100.0 / 0.02)); };
  std::vector<double> t;
  for (const auto& p : model_spec(m).params)
    t.push_back(p.is_order ? 0.2 + 1.6 * u(rng) : mag());
  return t;
}

}  // namespace

TEST_CASE("catalogue parameter counts") {
  REQUIRE(parameter_count(Model::A) == 2);
  REQUIRE(parameter_count(Model::B) == 3);
  REQUIRE(parameter_count(Model::C) == 2);
  REQUIRE(parameter_count(Model::D) == 3);
  REQUIRE(parameter_count(Model::E) == 4);
  REQUIRE(parameter_count(Model::F) == 9);
  REQUIRE(parameter_count(Model::G) == 2);
  REQUIRE(model_catalogue().size() == 7);
}

TEST_CASE("model tags parse case-insensitively and reject junk") {
  REQUIRE(model_from_tag("B") == Model::B);
  REQUIRE(model_from_tag("g") == Model::G);
  REQUIRE_THROWS_AS(model_from_tag("X"), Error);
  REQUIRE_THROWS_AS(model_from_tag("AB"), Error);
}

TEST_CASE("Model A with alpha = 1 is an ideal capacitor") {
  for (double w : {0.2, 1.0, 30.0}) {
    const cd c = evaluate_at(Model::A, std::vector<double>{2.3, 1.0}, w);
    REQUIRE(std::abs(c - cd(2.3, 0.0)) < 1e-15 * 2.3);
  }
}

TEST_CASE("Model B collapses to Model A as R vanishes") {
  const std::vector<double> a = {1.4, 0.65};
  const std::vector<double> b = {1e-12, 1.4, 0.65};
  for (double w : {0.5, 5.0, 60.0}) {
    const cd ca = evaluate_at(Model::A, a, w);
    const cd cb = evaluate_at(Model::B, b, w);
    REQUIRE(std::abs(cb - ca) <= 1e-9 * std::abs(ca));
  }
}

TEST_CASE("Model G equals Model B at alpha = 1, bit for bit") {
  const std::vector<double> g = {0.09, 1.31};
  const std::vector<double> b = {0.09, 1.31, 1.0};
  for (double w : {0.4, 2.0, 11.0, 70.0}) {
    const cd cg = evaluate_at(Model::G, g, w);
    const cd cb = evaluate_at(Model::B, b, w);
    REQUIRE(cg.real() == cb.real());
    REQUIRE(cg.imag() == cb.imag());
  }
}

TEST_CASE("frozen regression value: Model C at [1, 0.5], omega = 1") {
  // j^0.5 / (j^0.5 + j) with the principal branch, computed independently
  // with 30-digit arithmetic and frozen here.
  const cd c = evaluate_at(Model::C, std::vector<double>{1.0, 0.5}, 1.0);
  REQUIRE(c.real() == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(c.imag() == Catch::Approx(-0.20710678118654752).margin(1e-15));
}

TEST_CASE("tied Model C at alpha = 1 halves the capacitance") {
  for (double w : {0.3, 1.0, 12.0}) {
    const cd c = evaluate_at(Model::C, std::vector<double>{3.2, 1.0}, w);
    REQUIRE(std::abs(c - cd(1.6, 0.0)) < 1e-14);
  }
}

TEST_CASE("all closed forms agree with an independent complex-pow oracle") {
  std::mt19937_64 rng(21);
  for (Model m : kAllModels) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto t = random_theta(m, rng);
      for (double w : {0.3, 1.7, 9.0, 55.0}) {
        const cd got = evaluate_at(m, t, w);
        const cd want = oracle_eval(m, t, w);
        REQUIRE(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("property: conjugate frequencies give conjugate compliance") {
  std::mt19937_64 rng(22);
  for (Model m : kAllModels) {
    const auto t = random_theta(m, rng);
    for (double w : {0.6, 3.0, 24.0}) {
      const cd plus = evaluate_at(m, t, w);
      const cd minus = oracle_eval(m, t, w, /*conjugate_s=*/true);
      REQUIRE(std::abs(std::conj(plus) - minus) <= 1e-12 * std::max(1.0, std::abs(plus)));
    }
  }
}

TEST_CASE("property: no branch jumps in alpha") {
  const double w = 17.0;
  for (double alpha = 0.05; alpha < 2.0; alpha += 0.05) {
    const cd c1 = evaluate_at(Model::A, std::vector<double>{1.2, alpha}, w);
    const cd c2 = evaluate_at(Model::A, std::vector<double>{1.2, alpha + 1e-9}, w);
    REQUIRE(std::abs(c2 - c1) <= 1e-7 * std::abs(c1));
  }
}

TEST_CASE("Model F tends to C_stat at low frequency") {
  const std::vector<double> t = {2.7, 0.2, 1.0, 5.0, 40.0, 0.5, 2.0, 8.0, 90.0};
  const cd c = evaluate_at(Model::F, t, 1e-6);
  REQUIRE(std::abs(c - cd(2.7, 0.0)) < 1e-5 * 2.7);
}

TEST_CASE("total compliance estimate classifies the DC limit") {
  SECTION("Voigt limit is the static capacitance") {
    const auto e = total_compliance_estimate(Model::G, std::vector<double>{0.1, 1.3}, 1e-4);
    REQUIRE_FALSE(e.divergent);
    REQUIRE(e.limit.value() == 1.3);
    REQUIRE(e.magnitude_at_ref == Catch::Approx(1.3).epsilon(1e-6));
  }
  SECTION("fractional Model A diverges") {
    const auto e = total_compliance_estimate(Model::A, std::vector<double>{1.5, 0.6}, 1.0);
    REQUIRE(e.divergent);
    REQUIRE(e.magnitude_at_ref == Catch::Approx(1.5));
    REQUIRE_FALSE(total_compliance_estimate(Model::A, std::vector<double>{1.5, 1.0}, 1.0).divergent);
  }
  SECTION("Model F settles at C_stat; checked numerically near DC") {
    const std::vector<double> t = {1.9, 0.3, 1.5, 6.0, 30.0, 0.8, 3.0, 12.0, 70.0};
    const auto e = total_compliance_estimate(Model::F, t, 1e-6);
    REQUIRE_FALSE(e.divergent);
    REQUIRE(e.limit.value() == 1.9);
    REQUIRE(e.magnitude_at_ref == Catch::Approx(1.9).epsilon(1e-4));
  }
  SECTION("series capacitor dominates Model C below alpha = 1") {
    const auto e = total_compliance_estimate(Model::C, std::vector<double>{2.4, 0.5}, 1e-8);
    REQUIRE_FALSE(e.divergent);
    REQUIRE(e.limit.value() == 2.4);
    REQUIRE(e.magnitude_at_ref == Catch::Approx(2.4).epsilon(1e-3));
    REQUIRE(total_compliance_estimate(Model::C, std::vector<double>{2.4, 1.3}, 1.0).divergent);
  }
  SECTION("Model E settles at 1/R1 above alpha = 1") {
    const std::vector<double> t = {0.74, 37.91, 0.08, 1.29};
    const auto e = total_compliance_estimate(Model::E, t, 1e-5);
    REQUIRE_FALSE(e.divergent);
    REQUIRE(e.limit.value() == Catch::Approx(1.0 / 0.74));
    // approach is omega^(alpha-1)-slow; check it closes in monotonically
    const double gap_far = std::fabs(
        total_compliance_estimate(Model::E, t, 1e-2).magnitude_at_ref - 1.0 / 0.74);
    const double gap_mid = std::fabs(e.magnitude_at_ref - 1.0 / 0.74);
    const double gap_near = std::fabs(
        total_compliance_estimate(Model::E, t, 1e-9).magnitude_at_ref - 1.0 / 0.74);
    REQUIRE(gap_mid < gap_far);
    REQUIRE(gap_near < gap_mid);
    REQUIRE(gap_near < 1e-2);
    REQUIRE(total_compliance_estimate(Model::E, std::vector<double>{0.7, 30.0, 0.1, 0.8}, 1.0)
                .divergent);
  }
}

TEST_CASE("default bounds and initial points") {
  const auto a = default_bounds_and_init(Model::A);
  REQUIRE(a.init == std::vector<double>{1.0, 0.8});
  REQUIRE(a.lower == std::vector<double>{1e-8, 0.0});
  REQUIRE(a.upper[0] == 1e4);
  REQUIRE(std::isinf(a.upper[1]));

  const auto b = default_bounds_and_init(Model::B);
  REQUIRE(b.init.size() == 3);
  REQUIRE(b.init[0] == 0.1);  // resistance

  const auto f = default_bounds_and_init(Model::F);
  REQUIRE(f.init.size() == 9);
  REQUIRE(f.init[1] == Catch::Approx(0.1));
  REQUIRE(f.init[4] == Catch::Approx(100.0));
  REQUIRE(f.init[5] == Catch::Approx(0.1));
}

TEST_CASE("parameter validation") {
  REQUIRE_THROWS_MATCHES(evaluate(Model::A, std::vector<double>{1.0}, std::vector<double>{1.0}),
                         Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == errc::wrong_parameter_count;
                         }));
  REQUIRE_THROWS_MATCHES(
      evaluate(Model::A, std::vector<double>{0.0, 0.5}, std::vector<double>{1.0}), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::non_positive_parameter; }));
  REQUIRE_THROWS_AS(evaluate(Model::A, std::vector<double>{1.0, -0.2}, std::vector<double>{1.0}),
                    Error);
  REQUIRE_THROWS_MATCHES(
      evaluate(Model::A, std::vector<double>{1.0, 0.5}, std::vector<double>{0.0}), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::non_positive_frequency; }));
}
