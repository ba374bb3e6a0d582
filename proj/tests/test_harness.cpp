#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "mmfmd/datasetgen.hpp"
#include "mmfmd/error.hpp"
#include "mmfmd/harness.hpp"
#include "mmfmd/parallel.hpp"
#include "support.hpp"

using namespace mmfmd;
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

const fs::path& prmc10() {
  static const fs::path path = [] {
    auto p = testing::scratch("harness_prmc10.mmfd");
    gen_prmc(40, testing::basis10_64(), 77, p);
    return p;
  }();
  return path;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("prediction files round-trip with the documented layout") {
  PredictionFile preds;
  preds.modes = 2;
  preds.records = {{0.0f, 0.5f, 1.0f}, {0.25f, 0.75f, 0.125f}};
  const auto path = testing::scratch("preds.mmfp");
  write_predictions(path, preds);

  const auto bytes = slurp(path);
  REQUIRE(bytes.size() == 20 + 2 * 3 * 4);
  CHECK(std::memcmp(bytes.data(), "MMFP", 4) == 0);
  const unsigned char header_tail[16] = {1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0};
  CHECK(std::memcmp(bytes.data() + 4, header_tail, 16) == 0);
  float second;
  std::memcpy(&second, bytes.data() + 24, 4);
  CHECK(second == 0.5f);

  const auto back = read_predictions(path);
  CHECK(back.modes == 2);
  CHECK(back.records == preds.records);
}

TEST_CASE("prediction reader rejects malformed files") {
  PredictionFile preds;
  preds.modes = 2;
  preds.records = {{0.0f, 0.5f, 1.0f}, {0.25f, 0.75f, 0.125f}};
  const auto good = testing::scratch("good.mmfp");
  write_predictions(good, preds);
  const auto bytes = slurp(good);
  const auto bad = testing::scratch("bad.mmfp");

  auto magic = bytes;
  magic[3] = 'D';
  dump(bad, magic);
  CHECK_THROWS_AS(read_predictions(bad), FormatError);

  auto version = bytes;
  version[4] = 7;
  dump(bad, version);
  CHECK_THROWS_AS(read_predictions(bad), UnsupportedVersionError);

  auto cut = bytes;
  cut.resize(bytes.size() - 2);
  dump(bad, cut);
  try {
    read_predictions(bad);
    FAIL("expected truncation");
  } catch (const TruncatedFileError& e) {
    CHECK(e.record_index() == 1);
  }

  auto range = bytes;
  const float v = 1.5f;
  std::memcpy(range.data() + 20 + 4, &v, 4);
  dump(bad, range);
  CHECK_THROWS_AS(read_predictions(bad), FormatError);

  CHECK_THROWS_AS(read_predictions(testing::scratch("absent.mmfp")), IoError);
  PredictionFile wrong = preds;
  wrong.records[1].pop_back();
  CHECK_THROWS_AS(write_predictions(bad, wrong), ValidationError);
}

TEST_CASE("exact labels score at the perfect-prediction bound") {
  const auto& b = testing::basis10_64();
  const auto report = score_predictions(prmc10(), exact_predictions(prmc10()), b);
  CHECK(report.gammas.size() == 40);
  CHECK(report.mean() >= 0.9999);
  CHECK(report.resolution == "64x64");
  for (double g : report.gammas) {
    CHECK(g <= 1.0);
    CHECK(g >= -1.0);
  }
}

TEST_CASE("constant predictions score far below the trained range") {
  const auto& b = testing::basis10_64();
  const auto report = score_predictions(prmc10(), constant_predictions(10, 40), b);
  MESSAGE("constant 0.5 predictor, N = 10: mean gamma " << report.mean());
  CHECK(report.mean() < 0.9);
  for (double g : report.gammas) {
    CHECK(g <= 1.0);
    CHECK(g >= -1.0);
  }
}

TEST_CASE("score checks N, count and shape") {
  const auto& b = testing::basis10_64();
  CHECK_THROWS_AS(score_predictions(prmc10(), constant_predictions(3, 40), b), ValidationError);
  CHECK_THROWS_AS(score_predictions(prmc10(), constant_predictions(10, 39), b), ValidationError);
  CHECK_THROWS_AS(score_predictions(prmc10(), constant_predictions(10, 40), b.truncated(3)),
                  ValidationError);
  CHECK_THROWS_AS(constant_predictions(10, 1, 1.5f), ValidationError);
}

TEST_CASE("scoring is independent of record order and thread count") {
  const auto& b = testing::basis10_64();
  const auto records = read_dataset(prmc10());
  DatasetHeader h;
  read_dataset(prmc10(), &h);
  auto preds = constant_predictions(10, 40, 0.3f);
  for (std::size_t i = 0; i < 40; ++i) preds.records[i][i % 19] = 0.9f;

  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[17]);
  const auto shuffled = testing::scratch("harness_perm.mmfd");
  PredictionFile shuffled_preds;
  shuffled_preds.modes = 10;
  {
    DatasetWriter w(shuffled, h);
    for (auto i : perm) {
      w.write(records[i]);
      shuffled_preds.records.push_back(preds.records[i]);
    }
    w.close();
  }

  set_thread_count(1);
  const auto a = score_predictions(prmc10(), preds, b);
  set_thread_count(3);
  const auto c = score_predictions(prmc10(), preds, b);
  const auto p = score_predictions(shuffled, shuffled_preds, b);
  set_thread_count(0);
  CHECK(a.gammas == c.gammas);
  for (std::size_t k = 0; k < 40; ++k) CHECK(p.gammas[k] == a.gammas[perm[k]]);
  CHECK(p.mean() == doctest::Approx(a.mean()).epsilon(1e-15));
  CHECK(p.stddev() == doctest::Approx(a.stddev()).epsilon(1e-12));
  CHECK(p.min() == a.min());
}

TEST_CASE("report statistics") {
  ScoreReport r{{1.0, 2.0, 3.0, 4.0}, "m", "r"};
  CHECK(r.mean() == 2.5);
  CHECK(r.stddev() == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(r.min() == 1.0);
  ScoreReport one{{0.5}, "m", "r"};
  CHECK(one.stddev() == 0.0);
}

TEST_CASE("emit_report: fixed columns, summary footer, round trip") {
  const auto path = testing::scratch("report.csv");
  ScoreReport a{{0.91, 0.987654321012345, 0.5}, "holographic", "183x183"};
  ScoreReport b{{0.1, 0.2}, "holographic", "64x64"};
  emit_report({a, b}, path, 0.98);
  const auto lines = lines_of(path);
  REQUIRE(lines.size() == 1 + 5 + 8 + 1);
  CHECK(lines[0] == "index,gamma,method,resolution");
  for (const auto& l : lines) CHECK(std::count(l.begin(), l.end(), ',') == 3);

  const auto parsed = parse_report(path);
  REQUIRE(parsed.reports.size() == 2);
  CHECK(parsed.reports[0].gammas == a.gammas);
  CHECK(parsed.reports[1].gammas == b.gammas);
  CHECK(parsed.reports[0].mean() == a.mean());
  CHECK(parsed.reports[0].stddev() == a.stddev());
  bool saw_ratio = false;
  for (const auto& s : parsed.summary) {
    if (s.statistic == "ratio") {
      saw_ratio = true;
      CHECK(s.value == 0.98);
      CHECK(s.method == "derived");
    }
    if (s.statistic == "mean" && s.resolution == "183x183") CHECK(s.value == a.mean());
    if (s.statistic == "count" && s.resolution == "64x64") CHECK(s.value == 2.0);
  }
  CHECK(saw_ratio);
}

TEST_CASE("empty report has header and summary only") {
  const auto path = testing::scratch("empty.csv");
  emit_report(ScoreReport{{}, "cnn", "64x64"}, path);
  const auto lines = lines_of(path);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "index,gamma,method,resolution");
  CHECK(lines[4] == "count,0,cnn,64x64");
  const auto parsed = parse_report(path);
  CHECK(parsed.reports.empty());
  CHECK(parsed.summary.size() == 4);
  CHECK_THROWS_AS(emit_report(ScoreReport{}, testing::scratch("no/such/dir/x.csv")), IoError);
}

TEST_CASE("noise-free resolution comparison is nearly lossless") {
  const auto basis = build_basis(fiber10_spec(183));
  const auto r = compare_resolutions(20, basis, CameraNoise{}, 4);
  CHECK(r.full.gammas.size() == 20);
  CHECK(r.down.gammas.size() == 20);
  CHECK(r.full.resolution == "183x183");
  CHECK(r.down.resolution == "64x64");
  CHECK(r.full.min() >= 0.999);
  CHECK(r.down.min() >= 0.999);
  const auto again = compare_resolutions(20, basis, CameraNoise{}, 4);
  CHECK(again.full.gammas == r.full.gammas);
  CHECK(again.down.gammas == r.down.gammas);
  CHECK_THROWS_AS(compare_resolutions(0, basis, CameraNoise{}, 4), ValidationError);
}
