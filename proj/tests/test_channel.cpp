#include <doctest.h>

#include <atomic>
#include <cmath>

#include "mmfmd/channel.hpp"
#include "mmfmd/error.hpp"
#include "mmfmd/holography.hpp"
#include "mmfmd/parallel.hpp"
#include "support.hpp"

using namespace mmfmd;

namespace {

double unitarity_error(const ComplexMatrix& t) {
  return (t.adjoint() * t - ComplexMatrix::Identity(t.rows(), t.cols())).cwiseAbs().maxCoeff();
}

double precoded_diag_fraction(std::size_t n, std::uint64_t seed, double sigma, const ModeBasis& b) {
  const auto ch = random_channel(n, seed, sigma);
  const auto dec = holographic_decomposer(b);
  const auto p = inverse_precode(measure_T(ch, b, dec).t);
  return diag_fraction(measure_T(ch, b, dec, p, 1).t.entries);
}

}  // namespace

TEST_CASE("random channels are unitary and seeded") {
  for (std::size_t n : {1u, 3u, 10u, 55u}) {
    const auto ch = random_channel(n, 5);
    CHECK(unitarity_error(ch.t_true.entries) <= 1e-12);
    CHECK(random_channel(n, 5).t_true.entries == ch.t_true.entries);
  }
  CHECK(random_channel(10, 5).t_true.entries != random_channel(10, 6).t_true.entries);
  CHECK_THROWS_AS(random_channel(0, 1), ValidationError);
  CHECK_THROWS_AS(random_channel(3, 1, -0.1), ValidationError);
}

TEST_CASE("per-mode loss scales columns into [1 - max_loss, 1]") {
  const auto lossless = random_channel(10, 3);
  const auto lossy = random_channel(10, 3, 0.0, 0.2);
  for (Eigen::Index j = 0; j < 10; ++j) {
    const double f = lossy.t_true.entries.col(j).norm();
    CHECK(f >= 0.8 - 1e-12);
    CHECK(f <= 1.0 + 1e-12);
    CHECK((lossy.t_true.entries.col(j) - f * lossless.t_true.entries.col(j)).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(random_channel(3, 1, 0.0, 1.0), ValidationError);
}

TEST_CASE("noise-free propagation applies T exactly and keeps the norm") {
  const auto ch = random_channel(10, 2);
  for (Eigen::Index j = 0; j < 10; ++j) {
    const auto y = propagate(ch, DecompositionVector::Unit(10, j), 0);
    CHECK((y - ch.t_true.entries.col(j)).norm() <= 1e-15);
    CHECK(y.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  DecompositionVector x = DecompositionVector::Random(10);
  CHECK(propagate(ch, x, 3).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
  CHECK_THROWS_AS(propagate(ch, DecompositionVector::Ones(3), 0), ValidationError);
}

TEST_CASE("measurement noise has the requested relative size") {
  const auto ch = random_channel(10, 4, 0.01);
  double mean = 0.0, sq = 0.0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    DecompositionVector x = DecompositionVector::Unit(10, t % 10) * (1.0 + t % 3);
    const double rel = (propagate(ch, x, t) - ch.t_true.entries * x).norm() / x.norm();
    mean += rel / trials;
    sq += rel * rel / trials;
  }
  CHECK(mean == doctest::Approx(0.01).epsilon(0.03));
  CHECK(std::sqrt(sq) == doctest::Approx(0.01).epsilon(0.02));
  // Same draw index, same noise.
  const DecompositionVector x = DecompositionVector::Unit(10, 0);
  CHECK(propagate(ch, x, 17) == propagate(ch, x, 17));
  CHECK(propagate(ch, x, 17) != propagate(ch, x, 18));
}

TEST_CASE("noise-free holographic measurement recovers T") {
  const auto& b55 = testing::basis55_64();
  const auto& b10 = testing::basis10_64();
  for (std::size_t n : {3u, 10u, 55u}) {
    const ModeBasis b = n == 55 ? b55 : b10.truncated(n);
    const auto ch = random_channel(n, 11);
    const auto m = measure_T(ch, b, holographic_decomposer(b));
    CAPTURE(n);
    CHECK(m.propagations == n);
    CHECK((m.t.entries - ch.t_true.entries).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(m.t.basis_id == basis_id(b));
  }
}

TEST_CASE("measurement counts calls and is thread-count invariant") {
  const auto& b = testing::basis10_64();
  const auto ch = random_channel(10, 8, 0.02);
  std::atomic<int> calls{0};
  const Decomposer counting = [&](const ComplexField& f) {
    ++calls;
    return holographic_decompose(f, b);
  };
  set_thread_count(1);
  const auto a = measure_T(ch, b, counting);
  set_thread_count(4);
  const auto c = measure_T(ch, b, counting);
  set_thread_count(0);
  CHECK(calls.load() == 20);
  CHECK(a.t.entries == c.t.entries);
  CHECK(measure_T(ch, b, counting, std::nullopt, 1).t.entries != a.t.entries);
  CHECK_THROWS_AS(measure_T(random_channel(3, 1), b, counting), ValidationError);
}

TEST_CASE("diag_fraction examples") {
  CHECK(diag_fraction(ComplexMatrix::Identity(7, 7)) == 1.0);
  for (int n : {2, 5, 55}) CHECK(diag_fraction(ComplexMatrix::Ones(n, n)) == doctest::Approx(1.0 / n));
  CHECK_THROWS_AS(diag_fraction(ComplexMatrix::Zero(3, 3)), ValidationError);
  CHECK_THROWS_AS(diag_fraction(ComplexMatrix::Ones(2, 3)), ValidationError);

  double mean = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) mean += diag_fraction(random_channel(55, s).t_true.entries) / 100.0;
  CHECK(mean == doctest::Approx(1.0 / 55.0).epsilon(0.1));
}

TEST_CASE("inverse precoding") {
  const auto id = inverse_precode({ComplexMatrix::Identity(6, 6), "id"});
  CHECK((id - ComplexMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-15);

  const auto ch = random_channel(10, 3);
  const auto p = inverse_precode(ch.t_true);
  for (Eigen::Index j = 0; j < p.cols(); ++j) CHECK(p.col(j).norm() == doctest::Approx(1.0));
  const ComplexMatrix eff = ch.t_true.entries * p;
  CHECK(diag_fraction(eff) >= 0.999);
  for (Eigen::Index i = 0; i < 10; ++i) CHECK(eff(i, i).real() > 0.0);

  ComplexMatrix bad = ComplexMatrix::Identity(4, 4);
  bad(3, 3) = 1e-9;
  try {
    inverse_precode({bad, "bad"});
    FAIL("expected a conditioning error");
  } catch (const ConditioningError& e) {
    CHECK(e.condition_number() == doctest::Approx(1e9));
  }
  CHECK(condition_number(ComplexMatrix::Identity(3, 3)) == doctest::Approx(1.0));
}

TEST_CASE("precoding diagonalizes the 10-mode channel and degrades with noise") {
  const auto& b = testing::basis10_64();
  CHECK(precoded_diag_fraction(10, 1, 0.0, b) >= 0.999);
  double previous = 1.1;
  for (double sigma : {0.0, 0.05, 0.2, 0.5}) {
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 8; ++s) mean += precoded_diag_fraction(10, s, sigma, b) / 8.0;
    CAPTURE(sigma);
    CHECK(mean < previous);
    previous = mean;
  }
}

TEST_CASE("known-mode detection") {
  const auto& b10 = testing::basis10_64();
  const auto& b55 = testing::basis55_64();
  for (std::size_t i = 0; i < b10.size(); ++i) {
    const auto& m = b10.mode(i);
    const ModeLabel label{m.l, m.m, m.parity};
    const auto self = detect_known_modes(label, b10, b10);
    CHECK(self.index == i);
    for (std::size_t k = 0; k < self.amplitudes.size(); ++k)
      CHECK(self.amplitudes[k] == doctest::Approx(k == i ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
    CHECK(detect_known_modes(label, b55, b10).index == i);
  }
  CHECK_THROWS_AS(detect_known_modes(ModeLabel::parse("LP41e"), b55, b10), ValidationError);
  CHECK_THROWS_AS(detect_known_modes(ModeLabel::parse("LP91e"), b55, b10), ValidationError);
  const auto coarse = build_basis(fiber10_spec(32));
  CHECK_THROWS_AS(detect_known_modes(ModeLabel::parse("LP01"), b55, coarse), ValidationError);
}
