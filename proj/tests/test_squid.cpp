#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "jtwpa/squid.hpp"

using namespace jtwpa;
using constants::phi0;
using constants::pi;

namespace {

// Independent root finder for phi + beta_L*sin(phi) = phi_e: plain bisection,
// no shared code with the implementation.
double bisect_dc_phase(double phi_e, double beta_L) {
  double lo = phi_e - 1.0, hi = phi_e + 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = mid + beta_L * std::sin(mid) - phi_e;
    (f > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Neumaier compensated summation, used to pin the profile-mean invariant.
double compensated_mean(const std::vector<double>& x) {
  double sum = 0.0, comp = 0.0;
  for (double v : x) {
    double t = sum + v;
    comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + comp) / double(x.size());
}

const SquidParams paper_squid = SquidParams::with_icrj(84e-12, 1.57e-6, 20e-15, 16.5e-3);

}  // namespace

TEST_CASE("screening parameter") {
  double bl = screening_parameter(84e-12, 1.57e-6);
  CHECK(bl == 84e-12 * 1.57e-6 / phi0);
  CHECK(bl == doctest::Approx(0.4007).epsilon(5e-4));
  CHECK(screening_parameter(84e-12, 0.0) == 0.0);
  double ic = 1e-6;
  CHECK(screening_parameter(0.5 * phi0 / ic, ic) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(screening_parameter(-1e-12, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(screening_parameter(1e-12, -1e-6), std::invalid_argument);
}

TEST_CASE("dc phase solution") {
  CHECK(solve_dc_phase(0.0, 0.4) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(solve_dc_phase(pi, 0.4) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(solve_dc_phase(pi, 0.9) == doctest::Approx(pi).epsilon(1e-12));

  double oracle = bisect_dc_phase(2.501, 0.4007);
  double impl = solve_dc_phase(2.501, 0.4007);
  CHECK(std::abs(impl - oracle) < 1e-10);
  CHECK(impl == doctest::Approx(2.17).epsilon(5e-3));

  CHECK_THROWS_AS(solve_dc_phase(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("dc phase monotone and round-trips") {
  for (double bl : {0.1, 0.4007, 0.9}) {
    double prev = -1e9;
    for (int j = 0; j <= 200; ++j) {
      double phi_e = -10.0 + 0.1 * j;
      double phi = solve_dc_phase(phi_e, bl);
      CHECK(std::abs(phi + bl * std::sin(phi) - phi_e) < 1e-12);
      CHECK(phi > prev);
      prev = phi;
    }
  }
}

TEST_CASE("small-signal inductance") {
  CHECK(small_signal_inductance(84e-12, 0.4007, 2.174) ==
        doctest::Approx(109e-12).epsilon(0.01));
  CHECK(small_signal_inductance(84e-12, 0.4007, pi / 2) ==
        doctest::Approx(84e-12).epsilon(1e-12));
  CHECK(small_signal_inductance(84e-12, 0.0, 1.234) ==
        doctest::Approx(84e-12).epsilon(1e-12));
  CHECK_THROWS_AS(small_signal_inductance(84e-12, 1.5, pi), std::invalid_argument);
}

TEST_CASE("nonlinearity coefficients") {
  auto away = nonlinearity_coeffs(0.4, pi / 2);
  CHECK(away.beta == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(away.gamma == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

  auto zero = nonlinearity_coeffs(0.4, 0.0);
  CHECK(zero.beta == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(zero.gamma == doctest::Approx(0.4 / (6.0 * 1.4)).epsilon(1e-12));

  auto op = nonlinearity_coeffs(0.4007, 2.174);
  CHECK(op.beta == doctest::Approx(0.214).epsilon(5e-3));
  CHECK(op.gamma == doctest::Approx(-0.049).epsilon(2e-2));
  CHECK(std::abs(op.gamma) < 0.08);  // Kerr stays a fraction of beta
}

TEST_CASE("beta odd, gamma even, both 2pi periodic") {
  for (double bl : {0.1, 0.4007, 0.9}) {
    for (int j = 0; j < 1000; ++j) {
      double phi = -3.0 * pi + 6.0 * pi * j / 999.0;
      auto plus = nonlinearity_coeffs(bl, phi);
      auto minus = nonlinearity_coeffs(bl, -phi);
      auto shifted = nonlinearity_coeffs(bl, phi + 2.0 * pi);
      REQUIRE(std::abs(plus.beta + minus.beta) < 1e-12);
      REQUIRE(std::abs(plus.gamma - minus.gamma) < 1e-12);
      REQUIRE(std::abs(plus.beta - shifted.beta) < 1e-9);
      REQUIRE(std::abs(plus.gamma - shifted.gamma) < 1e-9);
    }
  }
}

TEST_CASE("bias chain reproduces the published operating point") {
  BiasPoint bp = make_bias_point(paper_squid, 9.8e-6);
  CHECK(bp.phi_e == doctest::Approx(2.501).epsilon(1e-3));
  CHECK(bp.L_S0 == doctest::Approx(109e-12).epsilon(0.01));
  CHECK(std::abs(bp.gamma) < 0.08);
}

TEST_CASE("loading profile layout and mean") {
  LoadingProfile p;  // paper values
  p.validate();
  CHECK(p.period() == 20);

  auto seq = p.sequence();
  REQUIRE(int(seq.size()) == p.cells);
  // segment pattern: C01 x5, C03 x5, C01 x5, C02 x5, then repeats
  CHECK(seq[0] == 8.8e-15);
  CHECK(seq[4] == 8.8e-15);
  CHECK(seq[5] == 80e-15);
  CHECK(seq[9] == 80e-15);
  CHECK(seq[10] == 8.8e-15);
  CHECK(seq[14] == 8.8e-15);
  CHECK(seq[15] == 62.3e-15);
  CHECK(seq[19] == 62.3e-15);
  CHECK(seq[20] == 8.8e-15);

  double closed = p.mean_capacitance();
  CHECK(closed == doctest::Approx(39.975e-15).epsilon(1e-12));
  CHECK(std::abs(compensated_mean(seq) - closed) < 1e-15 * closed);
  // engineered mean reproduces the uniform comparison value within 0.1%
  CHECK(closed == doctest::Approx(40e-15).epsilon(1e-3));

  LoadingProfile bad = p;
  bad.cells = 30;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  auto uni = LoadingProfile::uniform(40e-15, 1500);
  CHECK(uni.mean_capacitance() == 40e-15);
  CHECK(uni.is_uniform());
  CHECK(!p.is_uniform());
}

TEST_CASE("derived scales") {
  DerivedScales s = derived_scales(109e-12, 20e-15, 40e-15);
  CHECK(s.Zbar == doctest::Approx(52.2).epsilon(2e-3));
  CHECK(s.omega0 / constants::two_pi == doctest::Approx(76.2e9).epsilon(1e-3));
  CHECK(s.omegaJ / constants::two_pi == doctest::Approx(107.8e9).epsilon(1e-3));

  // both printed forms of the cutoff agree
  double alt = 1.0 / std::sqrt(1.0 / (s.omega0 * s.omega0) / 4.0 +
                               1.0 / (s.omegaJ * s.omegaJ));
  CHECK(std::abs(s.omegaC - alt) < 1e-12 * s.omegaC);
  CHECK(std::abs(s.Zbar * s.Zbar * s.Cbar - 109e-12) < 1e-12 * 109e-12);
}

TEST_CASE("line spec rejects hysteretic SQUIDs") {
  SquidParams hyst = paper_squid;
  hyst.Ic = 5e-6;  // beta_L > 1
  CHECK_THROWS_AS(make_line_spec(hyst, 9.8e-6, LoadingProfile{}), std::invalid_argument);

  LineSpec spec = make_line_spec(paper_squid, 9.8e-6, LoadingProfile{});
  CHECK(spec.scales.Cbar == doctest::Approx(39.975e-15).epsilon(1e-12));
  CHECK(spec.scales.Zbar == doctest::Approx(52.0).epsilon(0.02));
}

TEST_CASE("weak-dispersion approximation") {
  DerivedScales s = derived_scales(109e-12, 20e-15, 40e-15);
  double w_small = 2.0 * pi * 1e6;
  CHECK(approx_dispersion(w_small, s.omega0, s.omegaJ) ==
        doctest::Approx(w_small / s.omega0).epsilon(1e-9));
  double prev = 0.0;
  for (int j = 1; j <= 50; ++j) {
    double w = 2.0 * pi * 0.5e9 * j;
    double k = approx_dispersion(w, s.omega0, s.omegaJ);
    CHECK(k >= w / s.omega0);  // corrections are positive
    CHECK(k > prev);
    prev = k;
  }
}

TEST_CASE("subgap attenuation") {
  double rj = 16.5e-3 / 1.57e-6;
  double w = 2.0 * pi * 13e9;
  double a = subgap_attenuation_db(1500, w, 109e-12, 50.0, rj);
  double direct = 10.0 * std::log10(std::exp(1.0)) * 1500 * w * w * 109e-12 *
                  109e-12 / (50.0 * rj);
  CHECK(a == direct);
  CHECK(a == doctest::Approx(0.98).epsilon(0.02));
  CHECK(subgap_attenuation_db(1500, 0.0, 109e-12, 50.0, rj) == 0.0);
  CHECK(subgap_attenuation_db(3000, w, 109e-12, 50.0, rj) == doctest::Approx(2.0 * a));
  CHECK(subgap_attenuation_db(1500, w, 109e-12, 50.0,
                              std::numeric_limits<double>::infinity()) == 0.0);
}
