#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "canlearn/interlace.hpp"
#include "canlearn/synth.hpp"

using namespace canlearn;

namespace {

GaussianMeasure diag(std::initializer_list<double> values) {
  const int n = static_cast<int>(values.size());
  Mat m = Mat::Zero(n, n);
  int i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return validate_measure(m);
}

}  // namespace

TEST_CASE("identity covariances interlace") {
  CHECK(check_interlacing(diag({1, 1, 1}), diag({1, 1})).feasible);
}

TEST_CASE("frozen feasible pair (1,2,3) vs (1.5,2.5)") {
  CHECK(check_interlacing(diag({1, 2, 3}), diag({1.5, 2.5})).feasible);
}

TEST_CASE("frozen infeasible pair reports the first violated bound") {
  const FeasibilityVerdict v = check_interlacing(diag({1, 2, 3}), diag({5, 6}));
  REQUIRE(!v.feasible);
  REQUIRE(v.first_violation.has_value());
  CHECK(v.first_violation->index == 0);
  CHECK(v.first_violation->bound == InterlaceViolation::Bound::upper);
  CHECK(v.first_violation->lambda_i == doctest::Approx(1.0));
  CHECK(v.first_violation->kappa_i == doctest::Approx(5.0));
  CHECK(v.first_violation->lambda_upper == doctest::Approx(2.0));
}

TEST_CASE("violation below the lower bound") {
  // kappa_0 = 0.5 < lambda_0 = 1
  const FeasibilityVerdict v = check_interlacing(diag({1, 2, 3}), diag({0.5, 2}));
  REQUIRE(!v.feasible);
  CHECK(v.first_violation->bound == InterlaceViolation::Bound::lower);
}

TEST_CASE("tolerance slack is relative to the largest low eigenvalue") {
  CHECK(check_interlacing(diag({1, 2, 3}), diag({3 + 1e-12})).feasible);
  CHECK(!check_interlacing(diag({1, 2, 3}), diag({3 + 1e-6})).feasible);
}

TEST_CASE("equal dims are rejected") {
  CHECK_THROWS_AS(check_interlacing(diag({1, 2}), diag({1, 2})), ShapeError);
}

TEST_CASE("planted instances always satisfy the necessary condition") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const synth::LocalInstance inst = synth::gen_local_instance(8, 3, seed);
    CHECK(check_interlacing(inst.low, inst.high).feasible);
  }
}

TEST_CASE("shared_nonzero_spectra on frozen fixtures") {
  CHECK(shared_nonzero_spectra({diag({2, 1, 0}), diag({2, 1})}));
  CHECK(!shared_nonzero_spectra({diag({2, 1}), diag({2, 0.5})}));
  CHECK(!shared_nonzero_spectra({diag({2, 1, 1}), diag({2, 1})}));  // rank mismatch
  CHECK_THROWS_AS(shared_nonzero_spectra({diag({1})}), InvalidInput);
}

TEST_CASE("pushforward spectra are shared (compression preserves spectrum)") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const GaussianMeasure parent = synth::sample_spd(3, seed);
    const AbstractionStructure b = synth::sample_partition(7, 3, seed + 50);
    const Mat w = synth::sample_stiefel_on_support(b, seed + 90).effective();
    const GaussianMeasure child = validate_measure(w * parent.covariance * w.transpose());
    CHECK(shared_nonzero_spectra({child, parent}));
    CHECK(check_interlacing(child, parent).feasible);
  }
}
