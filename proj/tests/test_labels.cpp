#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmfmd/datasetgen.hpp"
#include "mmfmd/error.hpp"
#include "mmfmd/labels.hpp"
#include "support.hpp"

using namespace mmfmd;
using std::numbers::pi;

namespace {

double conjugation_error(const ModeWeights& got, const ModeWeights& want) {
  const auto g = got.coefficients();
  const double direct = (g - want.coefficients()).cwiseAbs().maxCoeff();
  const double conj = (g - want.conjugated().coefficients()).cwiseAbs().maxCoeff();
  return std::min(direct, conj);
}

double naive_gamma(const LabelVector& label, const SignPattern& s, const IntensityImage& target,
                   const ModeBasis& basis, const RoiMask& roi) {
  return cross_correlation(target, intensity(superpose(decode_with_signs(label, s), basis)), roi);
}

SignPattern negated(SignPattern s) {
  for (int& v : s.signs) v = -v;
  return s;
}

}  // namespace

TEST_CASE("canonicalize subtracts the reference phase") {
  const ModeWeights w({0.6, 0.0, 0.8}, {0.7, 1.2, 2.0});
  const auto c = canonicalize(w);
  CHECK(c.phases[0] == 0.0);
  CHECK(c.phases[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.phases[2] == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(is_canonical(c));
  const auto again = canonicalize(c);
  CHECK(again.amplitudes == c.amplitudes);
  CHECK(again.phases == c.phases);

  const ModeWeights wrap({1.0, 1.0}, {2.0, 1.0});
  CHECK(canonicalize(wrap).phases[1] == doctest::Approx(2.0 * pi - 1.0).epsilon(1e-15));
  CHECK(canonicalize(wrap).power() == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(canonicalize(ModeWeights({0.0, 0.0}, {0.0, 1.0})), ValidationError);
}

TEST_CASE("canonicalize leaves the intensity image unchanged") {
  const auto& b = testing::basis10_64();
  const auto raw = prmc_raw_weights(3, 2, 10);
  const auto before = intensity(superpose(raw, b));
  const auto after = intensity(superpose(canonicalize(raw), b));
  CHECK(cross_correlation(before, after) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encode stores amplitudes and (cos phi + 1) / 2") {
  const double r = 1.0 / std::sqrt(4.0);
  const ModeWeights w({r, r, r, r}, {0.0, pi, pi / 2, 0.0});
  const auto label = encode(w);
  REQUIRE(label.values.size() == 7);
  CHECK(label.modes() == 4);
  for (int i = 0; i < 4; ++i) CHECK(label.values[i] == doctest::Approx(r));
  CHECK(label.values[4] == doctest::Approx(0.0));
  CHECK(label.values[5] == doctest::Approx(0.5));
  CHECK(label.values[6] == doctest::Approx(1.0));
}

TEST_CASE("encode: zero amplitude stores phase value 1, non-canonical input throws") {
  const ModeWeights w({1.0, 0.0, 0.0}, {0.0, 2.0, 4.0});
  const auto label = encode(w);
  CHECK(label.values[3] == 1.0);
  CHECK(label.values[4] == 1.0);
  CHECK_THROWS_AS(encode(ModeWeights({1.0, 0.0}, {0.5, 0.0})), ValidationError);
  CHECK_THROWS_AS(encode(ModeWeights({0.5, 0.5}, {0.0, 0.0})), ValidationError);
}

TEST_CASE("labels are blind to conjugation and global phase") {
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto w = prmc_weights(8, k, 10);
    const auto label = encode(w);
    const auto conj = encode(canonicalize(w.conjugated()));
    for (std::size_t i = 0; i < label.values.size(); ++i)
      CHECK(conj.values[i] == doctest::Approx(label.values[i]).epsilon(1e-12));

    ModeWeights rotated = prmc_raw_weights(8, k, 10);
    for (double& p : rotated.phases) p = wrap_phase(p + 0.1 * static_cast<double>(k));
    const auto rot = encode(canonicalize(rotated));
    for (std::size_t i = 0; i < label.values.size(); ++i) {
      CHECK(rot.values[i] == doctest::Approx(label.values[i]).epsilon(1e-12));
      CHECK(label.values[i] >= 0.0);
      CHECK(label.values[i] <= 1.0);
    }
  }
}

TEST_CASE("sign patterns enumerate lexicographically with + first") {
  using S = std::vector<int>;
  CHECK(SignPattern::from_index(0, 3).signs == S{+1, +1, +1});
  CHECK(SignPattern::from_index(1, 3).signs == S{+1, +1, -1});
  CHECK(SignPattern::from_index(4, 3).signs == S{-1, +1, +1});
  CHECK(SignPattern::from_index(7, 3).signs == S{-1, -1, -1});
}

TEST_CASE("stored phase 0.75 gives candidates +-pi/3") {
  const double r = std::sqrt(0.5);
  const LabelVector label{{r, r, 0.75}};
  const auto plus = decode_with_signs(label, SignPattern{{+1}});
  const auto minus = decode_with_signs(label, SignPattern{{-1}});
  CHECK(plus.phases[1] == doctest::Approx(std::acos(0.5)).epsilon(1e-15));
  CHECK(plus.phases[1] == doctest::Approx(pi / 3).epsilon(1e-15));
  CHECK(minus.phases[1] == doctest::Approx(2 * pi - pi / 3).epsilon(1e-15));
  CHECK(plus.phases[0] == 0.0);
}

TEST_CASE("decode renormalizes amplitudes and clamps phase entries") {
  const LabelVector label{{0.3, 0.4, 1.3, -0.2}};
  // N = 2 needs 3 entries.
  CHECK_THROWS_AS(decode_with_signs(label, SignPattern{{+1}}), ValidationError);
  const LabelVector ok{{0.3, 0.4, 1.3}};
  const auto w = decode_with_signs(ok, SignPattern{{+1}});
  CHECK(w.power() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.amplitudes[0] == doctest::Approx(0.6));
  CHECK(w.phases[1] == 0.0);
  const LabelVector low{{0.3, 0.4, -0.5}};
  CHECK(decode_with_signs(low, SignPattern{{+1}}).phases[1] == doctest::Approx(pi));
}

TEST_CASE("sign search recovers exact labels up to conjugation") {
  const auto& b = testing::basis10_64();
  const auto roi = RoiMask::full(64);
  for (std::uint64_t k = 0; k < 40; ++k) {
    const auto w = prmc_weights(21, k, 10);
    const auto target = intensity(superpose(w, b));
    const auto r = decode_with_sign_search(encode(w), target, b, roi);
    CHECK(r.candidates == 512);
    CHECK(r.gamma >= 0.999);
    CHECK(conjugation_error(r.weights, w) <= 1e-6);
    CHECK(r.signs.signs.size() == 9);
  }
}

TEST_CASE("sign search matches naive re-synthesis") {
  const auto& full = testing::basis10_64();
  const auto b = full.truncated(5);
  const auto roi = RoiMask::circle(64, 20.0);
  for (std::uint64_t k = 0; k < 10; ++k) {
    // Perturbed label against the true image, so the best Gamma is below 1.
    const auto w = prmc_weights(4, k, 5);
    auto label = encode(w);
    for (std::size_t i = 0; i < label.values.size(); ++i)
      label.values[i] = std::clamp(label.values[i] + 0.05 * std::sin(3.0 * i + k), 0.0, 1.0);
    const auto target = intensity(superpose(w, b));
    const auto r = decode_with_sign_search(label, target, b, roi);
    REQUIRE(r.candidates == 16);

    double best = -2.0;
    for (std::size_t p = 0; p < 16; ++p)
      best = std::max(best, naive_gamma(label, SignPattern::from_index(p, 4), target, b, roi));
    CHECK(r.gamma == doctest::Approx(best).epsilon(1e-12));
    CHECK(naive_gamma(label, r.signs, target, b, roi) == doctest::Approx(r.gamma).epsilon(1e-12));
    // A pattern and its negation tie; the lower index (leading +) wins.
    CHECK(r.signs.signs[0] == +1);
    CHECK(naive_gamma(label, negated(r.signs), target, b, roi) ==
          doctest::Approx(r.gamma).epsilon(1e-12));
  }
}

TEST_CASE("sign search breaks full ties toward pattern 0") {
  const auto& b = testing::basis10_64();
  const ModeWeights pure({1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, std::vector<double>(10, 0.0));
  const auto r = decode_with_sign_search(encode(pure), intensity(superpose(pure, b)), b,
                                         RoiMask::full(64));
  CHECK(r.signs == SignPattern::from_index(0, 9));
  CHECK(r.gamma == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sign search errors") {
  const auto& b = testing::basis10_64();
  const auto w = prmc_weights(1, 0, 10);
  IntensityImage flat{RealGrid(64, 1.0), 1.0};
  CHECK_THROWS_AS(decode_with_sign_search(encode(w), flat, b, RoiMask::full(64)),
                  DegenerateCorrelationError);
  const auto target = intensity(superpose(w, b));
  CHECK_THROWS_AS(decode_with_sign_search(encode(prmc_weights(1, 0, 3)), target, b, RoiMask::full(64)),
                  ValidationError);
}
