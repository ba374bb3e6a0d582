#include "mmfmd/fiber_modes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mmfmd/error.hpp"

namespace mmfmd {
namespace {

constexpr double kScanStep = 0.01;
constexpr double kPoleOffset = 1e-9;

// Bisection on a bracket [lo, hi] with f(lo) and f(hi) of opposite sign,
// iterated until the bracket cannot shrink any further in double precision.
template <typename F>
double bisect(F&& f, double lo, double hi) {
  double f_lo = f(lo);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> scan_points(double lo, double hi) {
  std::vector<double> pts;
  pts.push_back(lo + kPoleOffset);
  for (double u = std::floor(lo / kScanStep + 1.0) * kScanStep; u < hi - kPoleOffset;
       u += kScanStep) {
    pts.push_back(u);
  }
  pts.push_back(hi - kPoleOffset);
  return pts;
}

// Zeros of J_l in (0, v): the singularities of the characteristic function.
std::vector<double> bessel_zeros(int l, double v) {
  std::vector<double> zeros;
  auto jl = [l](double u) { return std::cyl_bessel_j(l, u); };
  double prev_u = kScanStep;
  double prev = jl(prev_u);
  for (double u = 2 * kScanStep; u < v; u += kScanStep) {
    const double cur = jl(u);
    if (cur == 0.0) {
      zeros.push_back(u);
    } else if ((cur < 0.0) != (prev < 0.0) && prev != 0.0) {
      zeros.push_back(bisect(jl, prev_u, u));
    }
    prev_u = u;
    prev = cur;
  }
  if (!zeros.empty() || prev_u < v) {
    const double end = v * (1.0 - 1e-14);
    const double cur = jl(end);
    if (prev != 0.0 && cur != 0.0 && (cur < 0.0) != (prev < 0.0) && end > prev_u) {
      zeros.push_back(bisect(jl, prev_u, end));
    }
  }
  return zeros;
}

const char* parity_suffix(Parity p) { return p == Parity::even ? "e" : "o"; }

}  // namespace

FiberSpec FiberSpec::from_diameter(double core_diameter, double na, double wavelength,
                                   int grid_size, double window_factor) {
  FiberSpec spec;
  spec.core_radius = 0.5 * core_diameter;
  spec.na = na;
  spec.wavelength = wavelength;
  spec.grid_size = grid_size;
  spec.window_side = window_factor * core_diameter;
  return spec;
}

void FiberSpec::validate() const {
  if (!(core_radius > 0.0)) throw ValidationError("core_radius must be > 0");
  if (!(na > 0.0 && na < 1.0)) throw ValidationError("na must lie in (0, 1)");
  if (!(wavelength > 0.0)) throw ValidationError("wavelength must be > 0");
  if (grid_size < 16) throw ValidationError("grid_size must be >= 16");
  if (!(window_side >= 4.0 * core_radius * (1.0 - 1e-12)))
    throw ValidationError("window_side must be at least twice the core diameter");
}

FiberSpec fiber10_spec(int grid_size) {
  return FiberSpec::from_diameter(10e-6, 0.1, 532e-9, grid_size);
}

FiberSpec fiber55_spec(int grid_size) {
  return FiberSpec::from_diameter(25e-6, 0.1, 532e-9, grid_size);
}

std::string LpMode::label() const {
  return ModeLabel{l, m, parity}.str();
}

std::string ModeLabel::str() const {
  std::ostringstream os;
  os << "LP" << l << m;
  if (l > 0) os << parity_suffix(parity);
  return os.str();
}

ModeLabel ModeLabel::parse(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != ',' && c != '_' && !std::isspace(static_cast<unsigned char>(c)))
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s.size() < 4 || s.compare(0, 2, "lp") != 0)
    throw ValidationError("bad mode label '" + text + "'");
  ModeLabel out;
  std::size_t pos = 2;
  if (!std::isdigit(static_cast<unsigned char>(s[pos])) ||
      !std::isdigit(static_cast<unsigned char>(s[pos + 1])))
    throw ValidationError("bad mode label '" + text + "'");
  // Single-digit l and m as in the usual LP_lm notation.
  out.l = s[pos] - '0';
  out.m = s[pos + 1] - '0';
  pos += 2;
  if (out.m < 1) throw ValidationError("bad mode label '" + text + "'");
  if (pos == s.size()) {
    out.parity = Parity::even;
  } else if (pos + 1 == s.size() && (s[pos] == 'e' || s[pos] == 'o')) {
    if (out.l == 0 && s[pos] == 'o')
      throw ValidationError("LP0m modes have no odd orientation: '" + text + "'");
    out.parity = s[pos] == 'e' ? Parity::even : Parity::odd;
  } else {
    throw ValidationError("bad mode label '" + text + "'");
  }
  return out;
}

double v_number(const FiberSpec& spec) {
  return 2.0 * std::numbers::pi * spec.core_radius * spec.na / spec.wavelength;
}

double characteristic_residual(int l, double u, double v) {
  const double w = std::sqrt(v * v - u * u);
  const double lhs = u * std::cyl_bessel_j(l + 1, u) / std::cyl_bessel_j(l, u);
  const double rhs = w * std::cyl_bessel_k(l + 1, w) / std::cyl_bessel_k(l, w);
  return lhs - rhs;
}

std::vector<LpMode> solve_lp_modes(const FiberSpec& spec) {
  spec.validate();
  const double v = v_number(spec);
  std::vector<LpMode> modes;
  auto h = [v](int l) { return [l, v](double u) { return characteristic_residual(l, u, v); }; };

  for (int l = 0;; ++l) {
    auto zeros = bessel_zeros(l, v);
    std::vector<double> bounds{0.0};
    bounds.insert(bounds.end(), zeros.begin(), zeros.end());
    bounds.push_back(v);

    std::vector<double> roots;
    const auto f = h(l);
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      const auto pts = scan_points(bounds[b], bounds[b + 1]);
      double prev = f(pts.front());
      for (std::size_t k = 1; k < pts.size(); ++k) {
        const double cur = f(pts[k]);
        if (prev < 0.0 && cur >= 0.0) {
          roots.push_back(cur == 0.0 ? pts[k] : bisect(f, pts[k - 1], pts[k]));
          break;
        }
        prev = cur;
      }
    }
    if (roots.empty()) break;  // higher l are cut off as well

    for (std::size_t k = 0; k < roots.size(); ++k) {
      const double u = roots[k];
      const double w = std::sqrt(v * v - u * u);
      const int m = static_cast<int>(k) + 1;
      modes.push_back({l, m, Parity::even, u, w});
      if (l > 0) modes.push_back({l, m, Parity::odd, u, w});
    }
  }
  if (modes.empty()) throw ValidationError("fiber guides no mode");

  std::stable_sort(modes.begin(), modes.end(), [](const LpMode& a, const LpMode& b) {
    if (a.u != b.u) return a.u < b.u;
    if (a.l != b.l) return a.l < b.l;
    return a.parity == Parity::even && b.parity == Parity::odd;
  });
  return modes;
}

RealGrid sample_mode_field(const FiberSpec& spec, const LpMode& mode) {
  const auto n = static_cast<std::size_t>(spec.grid_size);
  RealGrid grid(n);
  const double a = spec.core_radius;
  const double jl_u = std::cyl_bessel_j(mode.l, mode.u);
  const double kl_w = std::cyl_bessel_k(mode.l, mode.w);
  for (std::size_t row = 0; row < n; ++row) {
    const double y = ((row + 0.5) / n - 0.5) * spec.window_side;
    for (std::size_t col = 0; col < n; ++col) {
      const double x = ((col + 0.5) / n - 0.5) * spec.window_side;
      const double r = std::hypot(x, y);
      const double theta = std::atan2(y, x);
      const double radial = r <= a ? std::cyl_bessel_j(mode.l, mode.u * r / a) / jl_u
                                   : std::cyl_bessel_k(mode.l, mode.w * r / a) / kl_w;
      const double angular = mode.parity == Parity::even ? std::cos(mode.l * theta)
                                                         : std::sin(mode.l * theta);
      grid(row, col) = radial * angular;
    }
  }
  return grid;
}

ModeBasis::ModeBasis(FiberSpec spec, std::vector<LpMode> modes, std::vector<RealGrid> fields,
                     double raw_orthogonality_error)
    : spec_(spec), modes_(std::move(modes)), fields_(std::move(fields)),
      raw_error_(raw_orthogonality_error) {
  if (modes_.size() != fields_.size())
    throw ValidationError("mode list and field list differ in length");
}

std::optional<std::size_t> ModeBasis::find(const ModeLabel& label) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& md = modes_[i];
    if (md.l == label.l && md.m == label.m && (md.l == 0 || md.parity == label.parity))
      return i;
  }
  return std::nullopt;
}

ModeBasis ModeBasis::truncated(std::size_t n) const {
  if (n == 0 || n > size())
    throw ValidationError("cannot truncate a " + std::to_string(size()) + "-mode basis to " +
                          std::to_string(n) + " modes");
  return ModeBasis(spec_, {modes_.begin(), modes_.begin() + static_cast<std::ptrdiff_t>(n)},
                   {fields_.begin(), fields_.begin() + static_cast<std::ptrdiff_t>(n)},
                   raw_error_);
}

namespace {

Eigen::MatrixXd field_matrix(const std::vector<RealGrid>& fields) {
  const auto pixels = static_cast<Eigen::Index>(fields.front().size());
  Eigen::MatrixXd m(pixels, static_cast<Eigen::Index>(fields.size()));
  for (std::size_t j = 0; j < fields.size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(fields[j].values().data(), pixels);
  }
  return m;
}

}  // namespace

ModeBasis build_basis(const FiberSpec& spec) {
  auto modes = solve_lp_modes(spec);
  const double area = spec.pixel_area();

  std::vector<RealGrid> fields;
  fields.reserve(modes.size());
  for (const auto& md : modes) {
    auto g = sample_mode_field(spec, md);
    double power = 0.0;
    for (double x : g) power += x * x;
    const double scale = 1.0 / std::sqrt(power * area);
    for (double& x : g) x *= scale;
    fields.push_back(std::move(g));
  }

  // Symmetric (Loewdin) orthonormalization: the orthonormal set closest to
  // the sampled fields in the least-squares sense. Keeps the canonical order
  // and each field's symmetry class.
  Eigen::MatrixXd psi = field_matrix(fields);
  const Eigen::MatrixXd raw_gram = area * psi.transpose() * psi;
  const double raw_error = max_offdiagonal(raw_gram);
  if (raw_error > kRawOrthogonalityLimit) {
    throw OrthogonalityError("sampled mode fields overlap by " + std::to_string(raw_error) +
                             " (grid too coarse or window too small)");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(raw_gram);
  const Eigen::MatrixXd inv_sqrt = eig.eigenvectors() *
                                   eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                                   eig.eigenvectors().transpose();
  const Eigen::MatrixXd ortho = psi * inv_sqrt;
  for (std::size_t j = 0; j < fields.size(); ++j) {
    Eigen::Map<Eigen::VectorXd>(fields[j].values().data(), ortho.rows()) =
        ortho.col(static_cast<Eigen::Index>(j));
  }

  ModeBasis basis(spec, std::move(modes), std::move(fields), raw_error);
  const auto gram = gram_matrix(basis);
  if (max_offdiagonal(gram) > kOrthogonalityTolerance ||
      (gram.diagonal().array() - 1.0).abs().maxCoeff() > 1e-9) {
    throw OrthogonalityError("basis Gram matrix deviates from identity");
  }
  return basis;
}

Eigen::MatrixXd gram_matrix(const ModeBasis& basis) {
  std::vector<RealGrid> fields(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) fields[i] = basis.field(i);
  const Eigen::MatrixXd psi = field_matrix(fields);
  return basis.pixel_area() * psi.transpose() * psi;
}

double max_offdiagonal(const Eigen::MatrixXd& gram) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      if (i != j) worst = std::max(worst, std::abs(gram(i, j)));
  return worst;
}

}  // namespace mmfmd
