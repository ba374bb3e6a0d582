#include "mmfmd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "binary_io.hpp"
#include "mmfmd/error.hpp"
#include "mmfmd/holography.hpp"
#include "mmfmd/labels.hpp"
#include "mmfmd/parallel.hpp"

namespace mmfmd {

namespace fs = std::filesystem;

void write_predictions(const fs::path& path, const PredictionFile& preds) {
  if (preds.modes == 0) throw ValidationError("prediction file needs N > 0");
  const std::size_t len = 2 * std::size_t{preds.modes} - 1;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(kPredictionMagic.data(), 4);
  detail::put_u32(out, kContainerVersion);
  detail::put_u32(out, preds.modes);
  detail::put_u64(out, preds.records.size());
  for (const auto& rec : preds.records) {
    if (rec.size() != len) throw ValidationError("prediction record has the wrong length");
    for (float v : rec) detail::put_f32(out, v);
  }
  out.close();
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

PredictionFile read_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::array<unsigned char, kPredictionHeaderBytes> hdr{};
  in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (in.gcount() < 4 || !std::equal(kPredictionMagic.begin(), kPredictionMagic.end(), hdr.begin()))
    throw FormatError("'" + path.string() + "' is not a prediction file (bad magic)");
  if (in.gcount() < 8) throw FormatError("prediction header truncated");
  const auto version = detail::get_u32(&hdr[4]);
  if (version != kContainerVersion) throw UnsupportedVersionError(version);
  if (in.gcount() != static_cast<std::streamsize>(hdr.size()))
    throw FormatError("prediction header truncated");

  PredictionFile preds;
  preds.modes = detail::get_u32(&hdr[8]);
  const std::uint64_t count = detail::get_u64(&hdr[12]);
  if (preds.modes == 0) throw FormatError("prediction header has N = 0");
  const std::size_t len = 2 * std::size_t{preds.modes} - 1;

  const auto size = fs::file_size(path);
  const std::uint64_t available = (size - kPredictionHeaderBytes) / (len * 4);
  if (available < count) throw TruncatedFileError(available);
  if (size != kPredictionHeaderBytes + count * len * 4)
    throw FormatError("prediction file has trailing bytes");

  std::vector<unsigned char> buf(len * 4);
  preds.records.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t r = 0; r < count; ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw TruncatedFileError(r);
    std::vector<float> rec(len);
    for (std::size_t k = 0; k < len; ++k) {
      rec[k] = detail::get_f32(&buf[4 * k]);
      if (!(rec[k] >= 0.0f && rec[k] <= 1.0f))
        throw FormatError("prediction " + std::to_string(r) + ": entry " + std::to_string(k) +
                          " outside [0, 1]");
    }
    preds.records.push_back(std::move(rec));
  }
  return preds;
}

PredictionFile exact_predictions(const fs::path& dataset) {
  DatasetReader reader(dataset);
  PredictionFile preds;
  preds.modes = reader.header().modes;
  while (auto rec = reader.next()) preds.records.push_back(std::move(rec->label));
  return preds;
}

PredictionFile constant_predictions(std::uint32_t modes, std::uint64_t count, float value) {
  if (!(value >= 0.0f && value <= 1.0f)) throw ValidationError("prediction value outside [0, 1]");
  PredictionFile preds;
  preds.modes = modes;
  preds.records.assign(static_cast<std::size_t>(count),
                       std::vector<float>(2 * std::size_t{modes} - 1, value));
  return preds;
}

double ScoreReport::mean() const {
  if (gammas.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(gammas.begin(), gammas.end(), 0.0) / static_cast<double>(gammas.size());
}

double ScoreReport::stddev() const {
  if (gammas.size() < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double g : gammas) ss += (g - m) * (g - m);
  return std::sqrt(ss / static_cast<double>(gammas.size() - 1));
}

double ScoreReport::min() const {
  if (gammas.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::min_element(gammas.begin(), gammas.end());
}

ScoreReport score_predictions(const fs::path& dataset, const PredictionFile& preds,
                              const ModeBasis& basis, const std::optional<RoiMask>& roi) {
  DatasetReader reader(dataset);
  const auto& h = reader.header();
  if (h.modes != preds.modes)
    throw ValidationError("dataset has N = " + std::to_string(h.modes) + ", predictions N = " +
                          std::to_string(preds.modes));
  if (h.count != preds.records.size())
    throw ValidationError("dataset has " + std::to_string(h.count) + " records, predictions " +
                          std::to_string(preds.records.size()));
  if (h.modes != basis.size() || h.height != basis.grid_side() || h.width != basis.grid_side())
    throw ValidationError("dataset shape does not match the mode basis");

  const RoiMask mask = roi ? *roi : RoiMask::full(basis.grid_side());
  ScoreReport report{std::vector<double>(static_cast<std::size_t>(h.count)), "cnn", ""};
  report.resolution = std::to_string(h.height) + "x" + std::to_string(h.width);

  constexpr std::size_t kChunk = 256;
  std::vector<DatasetRecord> chunk;
  for (std::size_t start = 0; start < report.gammas.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, report.gammas.size() - start);
    chunk.clear();
    for (std::size_t i = 0; i < len; ++i) chunk.push_back(*reader.next());
    parallel_for(0, len, [&](std::size_t i) {
      const LabelVector label{{preds.records[start + i].begin(), preds.records[start + i].end()}};
      const auto result =
          decode_with_sign_search(label, record_image(chunk[i], basis.spec().pixel_pitch()),
                                  basis, mask);
      report.gammas[start + i] = result.gamma;
    });
  }
  return report;
}

namespace {

// Downsamples amplitude and phase separately; phase via the mean unit phasor.
ComplexField downsample_field(const IntensityImage& amp, const ComplexField& phase_source,
                              std::size_t low) {
  const std::size_t n = amp.grid.side();
  RealGrid cos_part(n), sin_part(n);
  for (std::size_t k = 0; k < phase_source.grid.size(); ++k) {
    const double phi = std::arg(phase_source.grid[k]);
    cos_part[k] = std::cos(phi);
    sin_part[k] = std::sin(phi);
  }
  const auto amp_low = downsample(amp, low);
  const auto cos_low = downsample(cos_part, low);
  const auto sin_low = downsample(sin_part, low);
  ComplexField out{ComplexGrid(low), amp_low.pixel_pitch};
  for (std::size_t k = 0; k < out.grid.size(); ++k)
    out.grid[k] = std::polar(amp_low.grid[k], std::atan2(sin_low[k], cos_low[k]));
  return out;
}

}  // namespace

ResolutionComparison compare_resolutions(std::size_t trials, const ModeBasis& basis,
                                         const CameraNoise& noise, std::uint64_t seed,
                                         std::size_t low_size, ScoreReference reference) {
  if (trials < 1) throw ValidationError("compare_resolutions needs at least one trial");
  FiberSpec low_spec = basis.spec();
  low_spec.grid_size = static_cast<int>(low_size);
  const auto low_basis = build_basis(low_spec);
  const auto n = static_cast<unsigned>(basis.size());
  const std::string full_tag = std::to_string(basis.grid_side()) + "x" + std::to_string(basis.grid_side());
  const std::string low_tag = std::to_string(low_size) + "x" + std::to_string(low_size);

  ResolutionComparison out{{std::vector<double>(trials), "holographic", full_tag},
                           {std::vector<double>(trials), "holographic", low_tag}};
  parallel_for(0, trials, [&](std::size_t t) {
    const auto weights = prmc_weights(seed, t, n);
    const auto field = superpose(weights, basis);
    const auto measured = add_camera_noise(intensity(field), noise, seed, t);

    IntensityImage amp = measured;
    for (double& v : amp.grid) v = std::sqrt(v);
    ComplexField measured_field{ComplexGrid(field.grid.side()), field.pixel_pitch};
    for (std::size_t k = 0; k < field.grid.size(); ++k)
      measured_field.grid[k] = std::polar(amp.grid[k], std::arg(field.grid[k]));

    const bool vs_truth = reference == ScoreReference::ground_truth;
    const auto truth = amplitude(field);

    const auto rec_full = amplitude(superpose(holographic_decompose(measured_field, basis), basis));
    out.full.gammas[t] = cross_correlation(vs_truth ? truth : amp, rec_full);

    const auto low_field = downsample_field(amp, field, low_size);
    const auto rec_low =
        amplitude(superpose(holographic_decompose(low_field, low_basis), low_basis));
    out.down.gammas[t] =
        cross_correlation(vs_truth ? downsample(truth, low_size) : amplitude(low_field), rec_low);
  });
  return out;
}

void emit_report(const std::vector<ScoreReport>& reports, const fs::path& path,
                 std::optional<double> ratio) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  out << "index,gamma,method,resolution\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.gammas.size(); ++i)
      out << i << ',' << r.gammas[i] << ',' << r.method << ',' << r.resolution << '\n';
  for (const auto& r : reports) {
    out << "mean," << r.mean() << ',' << r.method << ',' << r.resolution << '\n';
    out << "std," << r.stddev() << ',' << r.method << ',' << r.resolution << '\n';
    out << "min," << r.min() << ',' << r.method << ',' << r.resolution << '\n';
    out << "count," << r.gammas.size() << ',' << r.method << ',' << r.resolution << '\n';
  }
  if (ratio) out << "ratio," << *ratio << ",derived,derived\n";
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

void emit_report(const ScoreReport& report, const fs::path& path) {
  emit_report(std::vector<ScoreReport>{report}, path);
}

ParsedReport parse_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "index,gamma,method,resolution")
    throw FormatError("report header missing");

  ParsedReport parsed;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 4) throw FormatError("report row does not have 4 columns: " + line);
    const bool is_row = !cols[0].empty() && std::all_of(cols[0].begin(), cols[0].end(), ::isdigit);
    if (is_row) {
      const auto key = std::make_pair(cols[2], cols[3]);
      auto it = slot.find(key);
      if (it == slot.end()) {
        it = slot.emplace(key, parsed.reports.size()).first;
        parsed.reports.push_back({{}, cols[2], cols[3]});
      }
      parsed.reports[it->second].gammas.push_back(std::stod(cols[1]));
    } else {
      parsed.summary.push_back({cols[0], std::stod(cols[1]), cols[2], cols[3]});
    }
  }
  return parsed;
}

}  // namespace mmfmd
