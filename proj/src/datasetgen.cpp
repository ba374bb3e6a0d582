#include "mmfmd/datasetgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "binary_io.hpp"
#include "mmfmd/error.hpp"
#include "mmfmd/field_ops.hpp"
#include "mmfmd/parallel.hpp"
#include "mmfmd/rng.hpp"

namespace mmfmd {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Container I/O
// ---------------------------------------------------------------------------

DatasetWriter::DatasetWriter(const fs::path& path, const DatasetHeader& header)
    : path_(path), header_(header) {
  if (header_.modes == 0 || header_.height == 0 || header_.width == 0)
    throw ValidationError("dataset header needs N, H, W > 0");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  out_.write(kDatasetMagic.data(), 4);
  detail::put_u32(out_, header_.version);
  detail::put_u32(out_, header_.modes);
  detail::put_u32(out_, header_.height);
  detail::put_u32(out_, header_.width);
  detail::put_u64(out_, header_.count);
  detail::put_u32(out_, header_.flags);
  detail::put_u64(out_, header_.seed);
}

void DatasetWriter::write(const DatasetRecord& record) {
  if (record.image.size() != std::size_t{header_.height} * header_.width ||
      record.label.size() != header_.label_length())
    throw ValidationError("record shape does not match the dataset header");
  if (written_ >= header_.count) throw ValidationError("more records than the header count");
  for (float v : record.image) detail::put_f32(out_, v);
  for (float v : record.label) detail::put_f32(out_, v);
  if (!out_) throw IoError("write failed on '" + path_.string() + "'");
  ++written_;
}

void DatasetWriter::close() {
  if (!out_.is_open()) return;
  out_.close();
  if (!out_) throw IoError("closing '" + path_.string() + "' failed");
  if (written_ != header_.count)
    throw ValidationError("dataset has " + std::to_string(written_) + " records, header says " +
                          std::to_string(header_.count));
}

DatasetReader::DatasetReader(const fs::path& path) : path_(path) {
  in_.open(path, std::ios::binary);
  if (!in_) throw IoError("cannot open '" + path.string() + "'");
  std::array<unsigned char, kDatasetHeaderBytes> buf{};
  in_.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (in_.gcount() < 4 || !std::equal(kDatasetMagic.begin(), kDatasetMagic.end(), buf.begin()))
    throw FormatError("'" + path.string() + "' is not a dataset file (bad magic)");
  if (in_.gcount() < 8) throw FormatError("dataset header truncated");
  header_.version = detail::get_u32(&buf[4]);
  if (header_.version != kContainerVersion) throw UnsupportedVersionError(header_.version);
  if (in_.gcount() != static_cast<std::streamsize>(buf.size()))
    throw FormatError("dataset header truncated");
  header_.modes = detail::get_u32(&buf[8]);
  header_.height = detail::get_u32(&buf[12]);
  header_.width = detail::get_u32(&buf[16]);
  header_.count = detail::get_u64(&buf[20]);
  header_.flags = detail::get_u32(&buf[28]);
  header_.seed = detail::get_u64(&buf[32]);
  if (header_.modes == 0 || header_.height == 0 || header_.width == 0)
    throw FormatError("dataset header has zero N, H or W");

  const auto size = fs::file_size(path);
  const std::uint64_t record_bytes = header_.record_floats() * 4;
  const std::uint64_t available = (size - kDatasetHeaderBytes) / record_bytes;
  if (available < header_.count) throw TruncatedFileError(available);
  if (size != header_.file_size())
    throw FormatError("dataset file has trailing bytes beyond " + std::to_string(header_.count) +
                      " records");
}

DatasetRecord DatasetReader::read_current(std::uint64_t index) {
  const std::size_t pixels = std::size_t{header_.height} * header_.width;
  std::vector<unsigned char> buf(header_.record_floats() * 4);
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buf.size())) throw TruncatedFileError(index);
  DatasetRecord rec;
  rec.image.resize(pixels);
  rec.label.resize(header_.label_length());
  for (std::size_t k = 0; k < pixels; ++k) rec.image[k] = detail::get_f32(&buf[4 * k]);
  for (std::size_t k = 0; k < rec.label.size(); ++k) {
    const float v = detail::get_f32(&buf[4 * (pixels + k)]);
    if (!(v >= 0.0f && v <= 1.0f))
      throw FormatError("record " + std::to_string(index) + ": label entry " + std::to_string(k) +
                        " outside [0, 1]");
    rec.label[k] = v;
  }
  return rec;
}

std::optional<DatasetRecord> DatasetReader::next() {
  if (cursor_ >= header_.count) return std::nullopt;
  auto rec = read_current(cursor_);
  ++cursor_;
  return rec;
}

DatasetRecord DatasetReader::read(std::uint64_t index) {
  if (index >= header_.count) throw ValidationError("record index out of range");
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kDatasetHeaderBytes + index * header_.record_floats() * 4));
  auto rec = read_current(index);
  cursor_ = index + 1;
  return rec;
}

std::vector<DatasetRecord> read_dataset(const fs::path& path, DatasetHeader* header) {
  DatasetReader reader(path);
  if (header) *header = reader.header();
  std::vector<DatasetRecord> records;
  records.reserve(static_cast<std::size_t>(reader.header().count));
  while (auto rec = reader.next()) records.push_back(std::move(*rec));
  return records;
}

DatasetRecord make_record(const ModeWeights& canonical, const ModeBasis& basis) {
  const auto img = intensity(superpose(canonical, basis));
  const double peak = *std::max_element(img.grid.begin(), img.grid.end());
  if (!(peak > 0.0)) throw ValidationError("refusing to store an all-zero intensity image");
  DatasetRecord rec;
  rec.image.resize(img.grid.size());
  for (std::size_t k = 0; k < img.grid.size(); ++k)
    rec.image[k] = static_cast<float>(img.grid[k] / peak);
  const auto label = encode(canonical);
  rec.label.assign(label.values.begin(), label.values.end());
  return rec;
}

IntensityImage record_image(const DatasetRecord& record, double pixel_pitch) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(record.image.size())));
  if (side * side != record.image.size()) throw ValidationError("record image is not square");
  IntensityImage img{RealGrid(side), pixel_pitch};
  std::copy(record.image.begin(), record.image.end(), img.grid.begin());
  return img;
}

LabelVector record_label(const DatasetRecord& record) {
  return LabelVector{{record.label.begin(), record.label.end()}};
}

namespace {

// Computes records in parallel blocks and appends them in index order.
template <typename WeightsAt>
void write_records(DatasetWriter& writer, std::uint64_t count, const ModeBasis& basis,
                   WeightsAt&& weights_at) {
  constexpr std::uint64_t kChunk = 512;
  std::vector<DatasetRecord> chunk;
  for (std::uint64_t start = 0; start < count; start += kChunk) {
    const std::uint64_t len = std::min(kChunk, count - start);
    chunk.assign(static_cast<std::size_t>(len), {});
    parallel_for(0, static_cast<std::size_t>(len), [&](std::size_t i) {
      chunk[i] = make_record(weights_at(start + i), basis);
    });
    for (const auto& rec : chunk) writer.write(rec);
  }
  writer.close();
}

DatasetHeader header_for(const ModeBasis& basis, std::uint64_t count, std::uint32_t flags,
                         std::uint64_t seed) {
  DatasetHeader h;
  h.modes = static_cast<std::uint32_t>(basis.size());
  h.height = h.width = static_cast<std::uint32_t>(basis.grid_side());
  h.count = count;
  h.flags = flags;
  h.seed = seed;
  return h;
}

std::uint64_t grid_points(double step) {
  return static_cast<std::uint64_t>(std::floor(1.0 / step + 1e-12)) + 1;
}

BigCount ipow(std::uint64_t base, unsigned exp) {
  BigCount r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// SMC
// ---------------------------------------------------------------------------

void SmcGridSpec::validate() const {
  if (!(s_amp > 0.0 && s_amp <= 1.0)) throw ValidationError("s_amp must lie in (0, 1]");
  if (!(s_phase > 0.0 && s_phase <= 1.0)) throw ValidationError("s_phase must lie in (0, 1]");
}

std::uint64_t SmcGridSpec::amp_points() const { return grid_points(s_amp); }
std::uint64_t SmcGridSpec::phase_points() const { return grid_points(s_phase); }

BigCount smc_count(double s_amp, double s_phase, unsigned modes) {
  SmcGridSpec spec{s_amp, s_phase, SmcMode::full_grid};
  spec.validate();
  if (modes == 0) throw ValidationError("smc_count: N must be >= 1");
  return ipow(spec.amp_points(), modes) * ipow(spec.phase_points(), modes - 1);
}

BigCount smc_record_count(const SmcGridSpec& spec, unsigned modes) {
  spec.validate();
  if (modes == 0) throw ValidationError("smc: N must be >= 1");
  const std::uint64_t ka = spec.amp_points() - 1;
  const std::uint64_t p = spec.phase_points();
  if (spec.mode == SmcMode::full_grid)
    return smc_count(spec.s_amp, spec.s_phase, modes) - ipow(p, modes - 1);
  const BigCount pairs = BigCount(modes) * (modes - 1) / 2;
  return BigCount(modes) + pairs * ka * ka * p;
}

ModeWeights smc_weights(const SmcGridSpec& spec, unsigned modes, std::uint64_t index) {
  const BigCount total = smc_record_count(spec, modes);
  if (BigCount(index) >= total) throw ValidationError("SMC record index out of range");
  const std::uint64_t na = spec.amp_points();
  const std::uint64_t np = spec.phase_points();
  ModeWeights w(std::vector<double>(modes, 0.0), std::vector<double>(modes, 0.0));

  if (spec.mode == SmcMode::full_grid) {
    // Odometer over (a_0..a_{N-1}, p_1..p_{N-1}), last digit fastest;
    // amplitude combination 0 (all zero) is skipped.
    const std::uint64_t phase_combos = static_cast<std::uint64_t>(ipow(np, modes - 1));
    std::uint64_t amp_combo = 1 + index / phase_combos;
    std::uint64_t phase_combo = index % phase_combos;
    for (unsigned i = modes; i-- > 1;) {
      w.phases[i] = static_cast<double>(phase_combo % np) * spec.s_phase * std::numbers::pi;
      phase_combo /= np;
    }
    for (unsigned i = modes; i-- > 0;) {
      w.amplitudes[i] = static_cast<double>(amp_combo % na) * spec.s_amp;
      amp_combo /= na;
    }
    return canonicalize(w);
  }

  // Extremes: one-hot records, then every pair (i < j) with both amplitudes
  // on the non-zero grid and the phase of mode j on the phase grid.
  if (index < modes) {
    w.amplitudes[index] = 1.0;
    return canonicalize(w);
  }
  std::uint64_t rest = index - modes;
  const std::uint64_t ka = na - 1;
  const std::uint64_t per_pair = ka * ka * np;
  std::uint64_t pair = rest / per_pair;
  rest %= per_pair;
  unsigned i = 0;
  while (pair >= modes - 1 - i) {
    pair -= modes - 1 - i;
    ++i;
  }
  const unsigned j = i + 1 + static_cast<unsigned>(pair);
  w.phases[j] = static_cast<double>(rest % np) * spec.s_phase * std::numbers::pi;
  rest /= np;
  w.amplitudes[j] = static_cast<double>(rest % ka + 1) * spec.s_amp;
  rest /= ka;
  w.amplitudes[i] = static_cast<double>(rest + 1) * spec.s_amp;
  return canonicalize(w);
}

void gen_smc(const SmcGridSpec& spec, const ModeBasis& basis, const fs::path& out,
             std::uint64_t cap) {
  const auto n = static_cast<unsigned>(basis.size());
  const BigCount total = smc_record_count(spec, n);
  if (total > BigCount(cap))
    throw ValidationError("SMC grid has " + total.str() + " records, above the cap of " +
                          std::to_string(cap));
  const auto count = static_cast<std::uint64_t>(total);
  DatasetWriter writer(out, header_for(basis, count, kFlagSmc, 0));
  write_records(writer, count, basis, [&](std::uint64_t k) { return smc_weights(spec, n, k); });
}

// ---------------------------------------------------------------------------
// PRMC
// ---------------------------------------------------------------------------

ModeWeights prmc_raw_weights(std::uint64_t seed, std::uint64_t index, unsigned modes) {
  CounterRng rng(seed, Stream::prmc_weights, index);
  ModeWeights w(std::vector<double>(modes), std::vector<double>(modes, 0.0));
  for (unsigned i = 0; i < modes; ++i) w.amplitudes[i] = rng.uniform();
  for (unsigned i = 1; i < modes; ++i) w.phases[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return w;
}

ModeWeights prmc_weights(std::uint64_t seed, std::uint64_t index, unsigned modes) {
  auto w = prmc_raw_weights(seed, index, modes);
  // An all-zero draw has probability 2^-53N; make it a one-hot LP01.
  if (!(w.power() > 0.0)) w.amplitudes[0] = 1.0;
  return canonicalize(w);
}

void gen_prmc(std::uint64_t count, const ModeBasis& basis, std::uint64_t seed,
              const fs::path& out) {
  if (count < 1) throw ValidationError("PRMC count must be >= 1");
  const auto n = static_cast<unsigned>(basis.size());
  DatasetWriter writer(out, header_for(basis, count, kFlagPrmc, seed));
  write_records(writer, count, basis, [&](std::uint64_t k) { return prmc_weights(seed, k, n); });
}

// ---------------------------------------------------------------------------
// Split
// ---------------------------------------------------------------------------

SplitSpec SplitSpec::ratio(double train, double val, double test) {
  SplitSpec s;
  s.fractions = {train, val, test};
  return s;
}

SplitSpec SplitSpec::holdout(std::uint64_t val, std::uint64_t test) {
  SplitSpec s;
  s.holdouts = std::array<std::uint64_t, 2>{val, test};
  return s;
}

std::array<std::uint64_t, 3> split_counts(std::uint64_t total, const SplitSpec& spec) {
  std::array<std::uint64_t, 3> counts{};
  if (spec.holdouts) {
    const auto [val, test] = *spec.holdouts;
    if (val + test >= total)
      throw ValidationError("holdouts (" + std::to_string(val + test) +
                            ") must be fewer than the record count " + std::to_string(total));
    counts = {total - val - test, val, test};
  } else {
    double sum = 0.0;
    for (double f : spec.fractions) {
      if (!(f >= 0.0)) throw ValidationError("split fractions must be non-negative");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
    std::array<double, 3> remainder{};
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      const double exact = static_cast<double>(total) * spec.fractions[i];
      counts[i] = static_cast<std::uint64_t>(std::floor(exact));
      remainder[i] = exact - static_cast<double>(counts[i]);
      assigned += counts[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % 3]];
  }
  for (auto c : counts)
    if (c == 0) throw ValidationError("split would leave a part empty");
  return counts;
}

void split(const fs::path& in, const SplitSpec& spec, std::uint64_t seed,
           const std::array<fs::path, 3>& out) {
  DatasetReader reader(in);
  const auto header = reader.header();
  const auto counts = split_counts(header.count, spec);

  std::vector<std::uint64_t> perm(static_cast<std::size_t>(header.count));
  std::iota(perm.begin(), perm.end(), std::uint64_t{0});
  CounterRng rng(seed, Stream::split_permutation, 0);
  for (std::size_t i = perm.size(); i-- > 1;) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

  std::size_t pos = 0;
  for (std::size_t part = 0; part < 3; ++part) {
    DatasetHeader h = header;
    h.count = counts[part];
    DatasetWriter writer(out[part], h);
    for (std::uint64_t k = 0; k < counts[part]; ++k) writer.write(reader.read(perm[pos++]));
    writer.close();
  }
}

}  // namespace mmfmd
