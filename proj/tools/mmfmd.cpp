// Command-line front end: mmfmd <subcommand> [--config file] [--seed S]
// [--threads T] [--out path] ...
//
// Exit codes: 0 success, 2 validation error, 3 I/O error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmfmd/channel.hpp"
#include "mmfmd/config.hpp"
#include "mmfmd/datasetgen.hpp"
#include "mmfmd/error.hpp"
#include "mmfmd/fiber_modes.hpp"
#include "mmfmd/field_ops.hpp"
#include "mmfmd/harness.hpp"
#include "mmfmd/holography.hpp"
#include "mmfmd/intensity_md.hpp"
#include "mmfmd/labels.hpp"
#include "mmfmd/parallel.hpp"

namespace fs = std::filesystem;
using namespace mmfmd;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  std::vector<std::string> overrides;  // key=value
};

Config load_config(const Globals& g) {
  Config cfg = g.config_path.empty() ? Config{} : Config::load(g.config_path);
  for (const auto& kv : g.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  return cfg;
}

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  return out;
}

void close_csv(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

fs::path out_or(const Globals& g, const char* fallback) {
  return g.out.empty() ? fs::path(fallback) : fs::path(g.out);
}

const char* parity_name(const LpMode& m) {
  if (m.l == 0) return "-";
  return m.parity == Parity::even ? "e" : "o";
}

// basis.bin: dataset container with one record per mode. The image holds the
// mode field times the pixel pitch (unit sum of squares); the label is the
// one-hot encoding of the pure mode. The sidecar lists the modes.
int cmd_modes(const Globals& g) {
  const Config cfg = load_config(g);
  const ModeBasis basis = basis_from(cfg);
  const fs::path out = out_or(g, "basis.bin");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());

  const auto side = static_cast<std::uint32_t>(basis.grid_side());
  DatasetHeader header;
  header.modes = static_cast<std::uint32_t>(basis.size());
  header.height = side;
  header.width = side;
  header.count = basis.size();
  DatasetWriter writer(out, header);
  const double pitch = basis.spec().pixel_pitch();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    DatasetRecord rec;
    rec.image.reserve(basis.field(i).size());
    for (double v : basis.field(i)) rec.image.push_back(static_cast<float>(v * pitch));
    std::vector<double> rho(basis.size(), 0.0), phi(basis.size(), 0.0);
    rho[i] = 1.0;
    for (double v : encode(ModeWeights(rho, phi)).values) rec.label.push_back(static_cast<float>(v));
    writer.write(rec);
  }
  writer.close();

  fs::path sidecar = out;
  sidecar.replace_extension(".txt");
  auto txt = open_csv(sidecar);
  txt << "# V = " << v_number(basis.spec()) << ", grid " << side << "x" << side
      << ", pixel pitch " << pitch << " m\n";
  txt << "# index l m parity u w\n";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& m = basis.mode(i);
    txt << i << ' ' << m.l << ' ' << m.m << ' ' << parity_name(m) << ' ' << m.u << ' ' << m.w
        << '\n';
  }
  close_csv(txt, sidecar);
  std::cout << basis.size() << " modes (V = " << v_number(basis.spec()) << ") -> " << out.string()
            << ", " << sidecar.string() << '\n';
  return 0;
}

SmcGridSpec smc_spec_from(const Config& cfg) {
  SmcGridSpec spec;
  spec.s_amp = cfg.get_double("s_amp", 0.5);
  spec.s_phase = cfg.get_double("s_phase", 0.5);
  const auto mode = cfg.get_string("smc_mode", "full");
  if (mode == "full" || mode == "full_grid")
    spec.mode = SmcMode::full_grid;
  else if (mode == "extremes")
    spec.mode = SmcMode::extremes;
  else
    throw ValidationError("smc_mode must be 'full' or 'extremes', got '" + mode + "'");
  spec.validate();
  return spec;
}

int cmd_gen_dataset(const Globals& g) {
  const Config cfg = load_config(g);
  const ModeBasis basis = basis_from(cfg);
  const fs::path out = out_or(g, "dataset.mmfd");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const auto kind = cfg.get_string("kind", "prmc");
  if (kind == "smc") {
    const auto spec = smc_spec_from(cfg);
    gen_smc(spec, basis, out, cfg.get_uint("cap", kDefaultRecordCap));
  } else if (kind == "prmc") {
    gen_prmc(cfg.get_uint("count", 1000), basis, cfg.get_uint("seed", 0), out);
  } else {
    throw ValidationError("kind must be 'smc' or 'prmc', got '" + kind + "'");
  }
  DatasetReader check(out);
  std::cout << check.header().count << " records, N = " << check.header().modes << ", "
            << check.header().height << "x" << check.header().width << " -> " << out.string()
            << '\n';
  return 0;
}

int cmd_split(const Globals& g, const std::string& in) {
  const Config cfg = load_config(g);
  SplitSpec spec;
  if (cfg.has("holdout_val") || cfg.has("holdout_test"))
    spec = SplitSpec::holdout(cfg.get_uint("holdout_val", 0), cfg.get_uint("holdout_test", 0));
  else
    spec = SplitSpec::ratio(cfg.get_double("train", 0.8), cfg.get_double("val", 0.1),
                            cfg.get_double("test", 0.1));
  const fs::path prefix = out_or(g, fs::path(in).replace_extension().string().c_str());
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  const std::array<fs::path, 3> outs{prefix.string() + "_train.mmfd",
                                     prefix.string() + "_val.mmfd",
                                     prefix.string() + "_test.mmfd"};
  split(in, spec, cfg.get_uint("seed", 0), outs);
  for (const auto& p : outs) {
    DatasetReader r(p);
    std::cout << p.string() << ": " << r.header().count << " records\n";
  }
  return 0;
}

int cmd_make_predictions(const Globals& g, const std::string& dataset) {
  const Config cfg = load_config(g);
  const auto predictor = cfg.get_string("predictor", "exact");
  PredictionFile preds;
  if (predictor == "exact") {
    preds = exact_predictions(dataset);
  } else if (predictor == "constant") {
    DatasetReader r(dataset);
    preds = constant_predictions(r.header().modes, r.header().count,
                                 static_cast<float>(cfg.get_double("value", 0.5)));
  } else {
    throw ValidationError("predictor must be 'exact' or 'constant', got '" + predictor + "'");
  }
  const fs::path out = out_or(g, "predictions.mmfp");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_predictions(out, preds);
  std::cout << preds.records.size() << " predictions (" << predictor << ") -> " << out.string()
            << '\n';
  return 0;
}

double max_error(const DecompositionVector& a, const DecompositionVector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Per trial: superpose -> decompose (direct), and superpose -> hologram ->
// angular-spectrum reconstruction -> decompose.
int cmd_holo_roundtrip(const Globals& g) {
  Config cfg = load_config(g);
  if (!cfg.has("grid_size")) cfg.set("grid_size", "183");
  const ModeBasis basis = basis_from(cfg);
  const auto trials = cfg.get_uint("trials", 200);
  const auto seed = cfg.get_uint("seed", 0);
  const Carrier carrier = Carrier::diagonal(cfg.get_double("carrier", 0.25));
  const double ref_ratio = cfg.get_double("reference_ratio", 2.0);
  const double side = static_cast<double>(basis.grid_side());
  const auto roi = RoiMask::circle(basis.grid_side(), cfg.get_double("roi_radius_px", side / 6.0));
  const auto n = static_cast<unsigned>(basis.size());

  struct Row {
    double direct_gamma, direct_error, holo_gamma, holo_error;
  };
  std::vector<Row> rows(trials);
  parallel_for(0, trials, [&](std::size_t t) {
    const ModeWeights w = prmc_weights(seed, t, n);
    const auto truth = w.coefficients();
    const ComplexField field = superpose(w, basis);
    const auto direct = holographic_decompose(field, basis);
    const double direct_gamma =
        cross_correlation(intensity(field), intensity(superpose(direct, basis)));

    double peak = 0.0;
    for (const auto& v : field.grid) peak = std::max(peak, std::abs(v));
    const Hologram holo = record_hologram(field, carrier, ref_ratio * peak);
    const ComplexField rec = angular_spectrum_reconstruct(holo);
    const auto coeffs = holographic_decompose(rec, basis);
    rows[t] = {direct_gamma, max_error(direct, truth),
               cross_correlation(amplitude(field), amplitude(rec), roi), max_error(coeffs, truth)};
  });

  const fs::path path = out_or(g, "holo_roundtrip.csv");
  auto out = open_csv(path);
  out << "index,direct_gamma,direct_max_error,hologram_gamma,hologram_max_error\n";
  double worst_direct = 1.0, worst_holo = 1.0, max_holo_err = 0.0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    out << t << ',' << r.direct_gamma << ',' << r.direct_error << ',' << r.holo_gamma << ','
        << r.holo_error << '\n';
    worst_direct = std::min(worst_direct, r.direct_gamma);
    worst_holo = std::min(worst_holo, r.holo_gamma);
    max_holo_err = std::max(max_holo_err, r.holo_error);
  }
  close_csv(out, path);
  std::cout << trials << " trials: min direct gamma " << worst_direct << ", min hologram gamma "
            << worst_holo << ", max hologram coefficient error " << max_holo_err << " -> "
            << path.string() << '\n';
  return 0;
}

GsConfig gs_config_from(const Config& cfg) {
  GsConfig gs;
  gs.max_iters = static_cast<int>(cfg.get_int("max_iters", gs.max_iters));
  gs.restarts = static_cast<int>(cfg.get_int("restarts", gs.restarts));
  gs.tol = cfg.get_double("tol", gs.tol);
  gs.seed = cfg.get_uint("seed", 0);
  gs.validate();
  return gs;
}

// Intensity-only decomposition of dataset records. The basis comes from
// `basis_config` (falling back to --config); N and the grid must match.
int cmd_gs_decompose(const Globals& g, const std::string& basis_config, const std::string& dataset) {
  Globals bg = g;
  if (!basis_config.empty()) bg.config_path = basis_config;
  Config cfg = load_config(bg);
  DatasetReader reader(dataset);
  const auto& h = reader.header();
  if (!cfg.has("grid_size")) cfg.set("grid_size", std::to_string(h.width));
  if (!cfg.has("modes")) cfg.set("modes", std::to_string(h.modes));
  const ModeBasis basis = basis_from(cfg);
  if (basis.size() != h.modes || basis.grid_side() != h.width || h.width != h.height)
    throw ValidationError("basis (" + std::to_string(basis.size()) + " modes, " +
                          std::to_string(basis.grid_side()) + " px) does not match the dataset (" +
                          std::to_string(h.modes) + " modes, " + std::to_string(h.width) + " px)");
  const GsConfig gs = gs_config_from(cfg);
  const auto limit = std::min<std::uint64_t>(h.count, cfg.get_uint("limit", h.count));

  std::vector<DatasetRecord> records;
  records.reserve(limit);
  for (std::uint64_t i = 0; i < limit; ++i) records.push_back(*reader.next());

  std::vector<GsResult> results(limit);
  parallel_for(0, limit, [&](std::size_t i) {
    IntensityImage amp = record_image(records[i], basis.spec().pixel_pitch());
    for (double& v : amp.grid) v = std::sqrt(std::max(v, 0.0));
    results[i] = gs_decompose(amp, basis, gs, i);
  });

  const fs::path path = out_or(g, "gs.csv");
  auto out = open_csv(path);
  out << "index,gamma,best_restart";
  for (std::size_t k = 0; k < basis.size(); ++k) out << ",rho_" << k;
  for (std::size_t k = 0; k < basis.size(); ++k) out << ",phi_" << k;
  out << '\n';
  std::vector<double> gammas;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << i << ',' << r.gamma << ',' << r.best_restart;
    for (double v : r.weights.amplitudes) out << ',' << v;
    for (double v : r.weights.phases) out << ',' << v;
    out << '\n';
    gammas.push_back(r.gamma);
  }
  close_csv(out, path);
  if (!gammas.empty()) {
    std::sort(gammas.begin(), gammas.end());
    std::cout << gammas.size() << " records: median gamma " << gammas[gammas.size() / 2]
              << ", min " << gammas.front() << " -> " << path.string() << '\n';
  }
  return 0;
}

int cmd_score(const Globals& g, const std::string& dataset, const std::string& predictions) {
  Config cfg = load_config(g);
  DatasetHeader h;
  {
    DatasetReader reader(dataset);
    h = reader.header();
  }
  if (!cfg.has("grid_size")) cfg.set("grid_size", std::to_string(h.width));
  if (!cfg.has("modes")) cfg.set("modes", std::to_string(h.modes));
  const ModeBasis basis = basis_from(cfg);
  std::optional<RoiMask> roi;
  if (cfg.has("roi_radius_px"))
    roi = RoiMask::circle(basis.grid_side(), cfg.get_double("roi_radius_px", 0.0));

  const PredictionFile preds = read_predictions(predictions);
  ScoreReport report = score_predictions(dataset, preds, basis, roi);
  report.method = cfg.get_string("method", report.method);

  std::optional<double> ratio;
  if (cfg.has("reference_gamma")) ratio = report.mean() / cfg.get_double("reference_gamma", 1.0);
  const fs::path path = out_or(g, "score.csv");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  emit_report({report}, path, ratio);
  std::cout << report.gammas.size() << " records: mean gamma " << report.mean() << ", std "
            << report.stddev() << ", min " << report.min();
  if (ratio) std::cout << ", ratio " << *ratio;
  std::cout << " -> " << path.string() << '\n';
  return 0;
}

int cmd_compare_resolutions(const Globals& g) {
  Config cfg = load_config(g);
  if (!cfg.has("grid_size")) cfg.set("grid_size", "183");
  const ModeBasis basis = basis_from(cfg);
  CameraNoise noise;
  noise.read_noise_sigma = cfg.get_double("sigma", 0.01);
  noise.quantize_8bit = cfg.get_bool("quantize", true);
  const auto ref_name = cfg.get_string("reference", "ground_truth");
  ScoreReference reference;
  if (ref_name == "ground_truth")
    reference = ScoreReference::ground_truth;
  else if (ref_name == "measured")
    reference = ScoreReference::measured;
  else
    throw ValidationError("reference must be 'ground_truth' or 'measured', got '" + ref_name + "'");

  const auto result =
      compare_resolutions(cfg.get_uint("trials", 200), basis, noise, cfg.get_uint("seed", 0),
                          cfg.get_uint("low_size", 64), reference);
  const double ratio = result.down.mean() / result.full.mean();
  const fs::path path = out_or(g, "compare_resolutions.csv");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  emit_report({result.full, result.down}, path, ratio);
  std::cout << result.full.resolution << " mean gamma " << result.full.mean() << ", "
            << result.down.resolution << " mean gamma " << result.down.mean() << ", ratio "
            << ratio << " -> " << path.string() << '\n';
  return 0;
}

void write_magnitudes(const fs::path& path, const ComplexMatrix& m) {
  auto out = open_csv(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << std::abs(m(r, c));
    out << '\n';
  }
  close_csv(out, path);
}

// --out names a directory receiving t_before.csv, t_after.csv (|T| grids),
// detection.csv and summary.csv.
int cmd_simulate_mdm(const Globals& g, std::size_t n, std::optional<double> sigma_flag) {
  Config cfg = load_config(g);
  if (!cfg.has("grid_size")) cfg.set("grid_size", "64");
  const int grid = static_cast<int>(cfg.get_int("grid_size", 64));
  const double sigma = sigma_flag ? *sigma_flag : cfg.get_double("sigma", 0.0);
  const auto seed = cfg.get_uint("seed", 0);
  if (n == 0) throw ValidationError("--n must be positive");

  const ModeBasis fiber55 = build_basis(fiber55_spec(grid));
  const ModeBasis fiber10 = build_basis(fiber10_spec(grid));
  const ModeBasis& host = n <= fiber10.size() ? fiber10 : fiber55;
  if (n > host.size())
    throw ValidationError("--n " + std::to_string(n) + " exceeds the 55 guided modes");
  const ModeBasis basis = host.truncated(n);

  const ChannelModel ch =
      random_channel(n, seed, sigma, cfg.get_double("max_loss", 0.0), basis_id(basis));
  const Decomposer dec = holographic_decomposer(basis);
  const Measurement before = measure_T(ch, basis, dec);
  const ComplexMatrix precoder = inverse_precode(before.t);
  const Measurement after = measure_T(ch, basis, dec, precoder, 1);

  const fs::path dir = out_or(g, "mdm");
  fs::create_directories(dir);
  write_magnitudes(dir / "t_before.csv", before.t.entries);
  write_magnitudes(dir / "t_after.csv", after.t.entries);

  std::size_t hits = 0, shared = 0;
  {
    const fs::path path = dir / "detection.csv";
    auto out = open_csv(path);
    out << "source,detected,correct";
    for (const auto& m : fiber10.modes()) out << ',' << m.label();
    out << '\n';
    for (std::size_t i = 0; i < fiber10.size(); ++i) {
      const auto& m = fiber10.mode(i);
      const ModeLabel label{m.l, m.m, m.parity};
      if (!fiber55.find(label)) continue;
      const Detection d = detect_known_modes(label, fiber55, fiber10);
      const bool ok = d.index == i;
      ++shared;
      hits += ok;
      out << m.label() << ',' << fiber10.mode(d.index).label() << ',' << (ok ? 1 : 0);
      for (double a : d.amplitudes) out << ',' << a;
      out << '\n';
    }
    close_csv(out, path);
  }

  const double f_before = diag_fraction(before.t.entries);
  const double f_after = diag_fraction(after.t.entries);
  {
    const fs::path path = dir / "summary.csv";
    auto out = open_csv(path);
    out << "key,value\n"
        << "modes," << n << '\n'
        << "sigma," << sigma << '\n'
        << "seed," << seed << '\n'
        << "condition_number," << condition_number(before.t.entries) << '\n'
        << "diag_fraction_before," << f_before << '\n'
        << "diag_fraction_after," << f_after << '\n'
        << "propagations," << before.propagations + after.propagations << '\n'
        << "detected," << hits << '\n'
        << "shared_modes," << shared << '\n';
    close_csv(out, path);
  }
  std::cout << "N = " << n << ", sigma = " << sigma << ": diag fraction " << f_before << " -> "
            << f_after << "; detection " << hits << "/" << shared << " -> " << dir.string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimode fiber mode decomposition toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "key=value settings file");
  app.add_option("--seed", g.seed, "overrides the config seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores); results do not change");
  app.add_option("--out", g.out, "output path");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");

  auto* modes = app.add_subcommand("modes", "solve LP modes and dump the sampled basis");
  auto* gen = app.add_subcommand("gen-dataset", "generate an SMC or PRMC dataset");

  std::string split_in;
  auto* split_cmd = app.add_subcommand("split", "seeded train/val/test split of a dataset");
  split_cmd->add_option("--in", split_in, "dataset to split")->required();

  std::string pred_dataset;
  auto* make_pred =
      app.add_subcommand("make-predictions", "exact or constant prediction file for a dataset");
  make_pred->add_option("--dataset", pred_dataset)->required();

  auto* holo = app.add_subcommand("holo-roundtrip", "holographic round trips on random fields");

  std::string gs_basis, gs_dataset;
  auto* gs = app.add_subcommand("gs-decompose", "intensity-only decomposition of dataset records");
  gs->add_option("--basis", gs_basis, "fiber config for the basis (defaults to --config)");
  gs->add_option("--dataset", gs_dataset)->required();

  std::string score_dataset, score_preds;
  auto* score = app.add_subcommand("score", "score a prediction file against a dataset");
  score->add_option("--dataset", score_dataset)->required();
  score->add_option("--predictions", score_preds)->required();

  auto* compare =
      app.add_subcommand("compare-resolutions", "full vs downsampled holographic decomposition");

  std::size_t mdm_n = 55;
  std::optional<double> mdm_sigma;
  auto* mdm = app.add_subcommand("simulate-mdm", "transmission matrix, precoding, detection");
  mdm->add_option("--n", mdm_n, "number of modes");
  mdm->add_option("--sigma", mdm_sigma, "relative measurement noise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_thread_count(g.threads);
    if (*modes) return cmd_modes(g);
    if (*gen) return cmd_gen_dataset(g);
    if (*split_cmd) return cmd_split(g, split_in);
    if (*make_pred) return cmd_make_predictions(g, pred_dataset);
    if (*holo) return cmd_holo_roundtrip(g);
    if (*gs) return cmd_gs_decompose(g, gs_basis, gs_dataset);
    if (*score) return cmd_score(g, score_dataset, score_preds);
    if (*compare) return cmd_compare_resolutions(g);
    if (*mdm) return cmd_simulate_mdm(g, mdm_n, mdm_sigma);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
