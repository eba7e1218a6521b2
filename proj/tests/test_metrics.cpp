#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/QR>

#include "canlearn/metrics.hpp"
#include "canlearn/synth.hpp"

using namespace canlearn;
using namespace canlearn::metrics;

namespace {

GaussianMeasure scalar_measure(double v) {
  return validate_measure(v * Mat::Ones(1, 1));
}

StiefelMap map_from(const Mat& b, const Mat& v) {
  return make_stiefel_map(v, make_structure(b));
}

}  // namespace

TEST_CASE("scalar KL fixture: Tr + log gdet terms by hand") {
  // M = 2, Σh = 1: 1/2 + ln 2 − ln 1 − 1
  const StiefelMap id = map_from(Mat::Ones(1, 1), Mat::Ones(1, 1));
  const double kl = kl_divergence(id, scalar_measure(2.0), scalar_measure(1.0));
  CHECK(kl == doctest::Approx(0.19314718055994531).epsilon(1e-12));
}

TEST_CASE("KL vanishes at the planted map and on the identity case") {
  const synth::LocalInstance inst = synth::gen_local_instance(9, 3, 40);
  CHECK(kl_divergence(inst.planted, inst.low, inst.high) < 1e-10);

  Mat sigma(2, 2);
  sigma << 2, 0, 0, 1;
  const GaussianMeasure m = validate_measure(sigma);
  const StiefelMap id = map_from(Mat::Identity(2, 2), Mat::Identity(2, 2));
  CHECK(kl_divergence(id, m, m) == 0.0);
}

TEST_CASE("KL clamps round-off and flags rank mismatches") {
  const synth::LocalInstance inst = synth::gen_local_instance(6, 2, 41);
  bool mismatch = false;
  const double kl = kl_divergence(inst.planted, inst.low, inst.high, &mismatch);
  CHECK(kl >= 0.0);
  CHECK(!mismatch);

  // rank(M) = 2 against a rank-1 high measure
  Mat lo = Mat::Identity(4, 4);
  Mat hi = Mat::Zero(2, 2);
  hi(0, 0) = 1.0;
  Mat b(4, 2);
  b << 1, 0, 1, 0, 0, 1, 0, 1;
  const double r = std::sqrt(0.5);
  Mat v(4, 2);
  v << r, 0, r, 0, 0, r, 0, r;
  kl_divergence(map_from(b, v), validate_measure(lo), validate_measure(hi), &mismatch);
  CHECK(mismatch);
}

TEST_CASE("KL is invariant under an orthogonal change of low-level basis") {
  const synth::LocalInstance inst = synth::gen_local_instance(6, 3, 42);
  const Mat w = inst.planted.effective();
  rng::Rng r(43);
  Mat g(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) g(i, j) = r.normal();
  const Mat u = Eigen::HouseholderQR<Mat>(g).householderQ();
  const GaussianMeasure rotated =
      validate_measure(u * inst.low.covariance * u.transpose());
  const double a = kl_divergence_raw(w, inst.low, inst.high);
  const double b = kl_divergence_raw(u * w, rotated, inst.high);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("smoothness energy sums edge KLs and wants maps") {
  const synth::LocalInstance inst = synth::gen_local_instance(7, 3, 44);
  CanGraph g;
  g.measures = {inst.low, inst.high};
  g.edges = {CanEdge{0, 1, inst.structure, inst.planted}};
  CHECK(smoothness_energy(g) ==
        doctest::Approx(kl_divergence(inst.planted, inst.low, inst.high)));
  CHECK(smoothness_energy(g) < 1e-8);

  g.edges[0].map.reset();
  CHECK_THROWS_AS(smoothness_energy(g), MissingMap);
}

TEST_CASE("perturbing one map increases the smoothness energy") {
  const CanGraph truth = synth::gen_can(synth::make_spec(3, synth::Topology::chain, 45));
  CanGraph g = truth;
  std::vector<GaussianMeasure> section = synth::gen_global_section(truth, 46);
  g.measures = section;
  const double base = smoothness_energy(g);
  CHECK(base < 1e-8);
  // re-draw one edge map from a different seed: energy must rise
  g.edges[0].map = synth::sample_stiefel_on_support(g.edges[0].structure, 999);
  CHECK(smoothness_energy(g) > base + 1e-6);
}

TEST_CASE("frobenius distance is zero up to per-column signs") {
  const AbstractionStructure b = synth::sample_partition(8, 3, 47);
  const StiefelMap truth = synth::sample_stiefel_on_support(b, 48);
  CHECK(frobenius_up_to_sign(truth, truth) == 0.0);

  StiefelMap flipped = truth;
  flipped.v.col(1) *= -1.0;
  CHECK(frobenius_up_to_sign(flipped, truth) < 1e-15);
  rng::Rng r(49);
  StiefelMap both = truth;
  for (int j = 0; j < 3; ++j)
    if (r.uniform() < 0.5) both.v.col(j) *= -1.0;
  CHECK(frobenius_up_to_sign(both, truth) < 1e-15);
}

TEST_CASE("frozen frobenius fixture: one column moved inside its block") {
  Mat b(6, 3);
  b << 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1;
  Mat vt(6, 3);
  vt << 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0;
  Mat ve = vt;
  ve(0, 0) = 0.0;
  ve(1, 0) = 1.0;  // orthogonal unit vector in block 0
  const double d = frobenius_up_to_sign(map_from(b, ve), map_from(b, vt));
  CHECK(d == doctest::Approx(std::sqrt(2.0) / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("frobenius distance rejects mismatched structures") {
  const AbstractionStructure b1 = synth::sample_partition(6, 3, 50);
  AbstractionStructure b2 = b1;
  // move one non-pinning row to another block deterministically
  for (int i = 0; i < 6; ++i) {
    int j = 0;
    while (b2.b(i, j) == 0.0) ++j;
    if (b2.b.col(j).sum() > 1.0) {
      b2.b(i, j) = 0.0;
      b2.b(i, (j + 1) % 3) = 1.0;
      break;
    }
  }
  const StiefelMap v1 = synth::sample_stiefel_on_support(b1, 51);
  const StiefelMap v2 = synth::sample_stiefel_on_support(make_structure(b2.b), 52);
  CHECK_THROWS_AS(frobenius_up_to_sign(v2, v1), StructureMismatch);
}

TEST_CASE("F1 counts support agreement") {
  const AbstractionStructure b = synth::sample_partition(6, 2, 53);
  StiefelMap est = synth::sample_stiefel_on_support(b, 54);
  CHECK(f1_structure(est, b) == doctest::Approx(1.0));

  // zero one supported entry: TP=5, FN=1, FP=0 → 10/11
  for (int i = 0; i < 6; ++i)
    if (b.b(i, 0) == 1.0) {
      est.v(i, 0) = 0.0;
      break;
    }
  CHECK(f1_structure(est, b) == doctest::Approx(10.0 / 11.0).epsilon(1e-12));

  StiefelMap empty = est;
  empty.v.setZero();
  CHECK(f1_structure(empty, b) == 0.0);
}

TEST_CASE("constructiveness detects partition-shaped supports") {
  const AbstractionStructure b = synth::sample_partition(5, 2, 55);
  StiefelMap good = synth::sample_stiefel_on_support(b, 56);
  CHECK(constructiveness(good));

  StiefelMap doubled = good;
  doubled.v(0, 0) = 0.7;
  doubled.v(0, 1) = 0.7;  // two nonzeros in row 0
  CHECK(!constructiveness(doubled));

  StiefelMap hollow = good;
  hollow.v.col(1).setZero();
  CHECK(!constructiveness(hollow));
}
