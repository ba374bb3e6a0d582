#include "mmfmd/channel.hpp"

#include <cmath>
#include <sstream>

#include "mmfmd/error.hpp"
#include "mmfmd/holography.hpp"
#include "mmfmd/parallel.hpp"
#include "mmfmd/rng.hpp"

namespace mmfmd {

std::string basis_id(const ModeBasis& basis) {
  std::ostringstream os;
  os.precision(6);
  os << "lp:N=" << basis.size() << ":V=" << v_number(basis.spec())
     << ":grid=" << basis.grid_side();
  return os.str();
}

ChannelModel random_channel(std::size_t modes, std::uint64_t seed, double sigma, double max_loss,
                            std::string id) {
  if (modes < 1) throw ValidationError("channel needs at least one mode");
  if (sigma < 0.0) throw ValidationError("measurement noise sigma must be >= 0");
  if (max_loss < 0.0 || max_loss >= 1.0) throw ValidationError("max_loss must lie in [0, 1)");
  const auto n = static_cast<Eigen::Index>(modes);

  CounterRng rng(seed, Stream::channel_matrix, 0);
  ComplexMatrix g(n, n);
  for (Eigen::Index col = 0; col < n; ++col)
    for (Eigen::Index row = 0; row < n; ++row) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(row, col) = Complex{re, im} / std::sqrt(2.0);
    }

  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex d = r(i, i);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(i) *= d / mag;
  }

  if (max_loss > 0.0) {
    CounterRng loss_rng(seed, Stream::channel_loss, 0);
    for (Eigen::Index i = 0; i < n; ++i) q.col(i) *= 1.0 - max_loss * loss_rng.uniform();
  }

  ChannelModel ch;
  ch.t_true = {std::move(q), std::move(id)};
  ch.measurement_noise_sigma = sigma;
  ch.seed = seed;
  return ch;
}

DecompositionVector propagate(const ChannelModel& ch, const DecompositionVector& x,
                              std::uint64_t draw) {
  const auto& t = ch.t_true.entries;
  if (x.size() != t.cols())
    throw ValidationError("excitation has " + std::to_string(x.size()) + " entries, channel has " +
                          std::to_string(t.cols()) + " modes");
  DecompositionVector y = t * x;
  if (ch.measurement_noise_sigma > 0.0) {
    const double per_component = ch.measurement_noise_sigma * x.norm() /
                                 std::sqrt(2.0 * static_cast<double>(x.size()));
    CounterRng rng(ch.seed, Stream::channel_noise, draw);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      y(i) += per_component * Complex{re, im};
    }
  }
  return y;
}

Decomposer holographic_decomposer(const ModeBasis& basis) {
  return [&basis](const ComplexField& field) { return holographic_decompose(field, basis); };
}

Measurement measure_T(const ChannelModel& ch, const ModeBasis& basis, const Decomposer& decomposer,
                      const std::optional<ComplexMatrix>& excitations, std::uint64_t round) {
  const auto n = static_cast<Eigen::Index>(ch.t_true.size());
  if (static_cast<std::size_t>(n) != basis.size())
    throw ValidationError("channel and basis mode counts differ");
  if (excitations && (excitations->rows() != n || excitations->cols() != n))
    throw ValidationError("excitation matrix must be N x N");

  Measurement m;
  m.t = {ComplexMatrix(n, n), basis_id(basis)};
  std::vector<DecompositionVector> columns(static_cast<std::size_t>(n));
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    const DecompositionVector x = excitations ? DecompositionVector(excitations->col(col))
                                              : DecompositionVector::Unit(n, col);
    const auto y = propagate(ch, x, round * static_cast<std::uint64_t>(n) + j);
    auto c = decomposer(superpose(y, basis));
    if (c.size() != n) throw ValidationError("decomposer returned the wrong number of modes");
    columns[j] = std::move(c);
  });
  for (Eigen::Index j = 0; j < n; ++j) m.t.entries.col(j) = columns[static_cast<std::size_t>(j)];
  m.propagations = static_cast<std::size_t>(n);
  return m;
}

double condition_number(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

ComplexMatrix inverse_precode(const TransmissionMatrix& t_measured) {
  const auto& t = t_measured.entries;
  if (t.rows() != t.cols() || t.rows() == 0) throw ValidationError("T must be square");
  const double cond = condition_number(t);
  if (!(cond <= kMaxConditionNumber)) throw ConditioningError(cond);
  ComplexMatrix p = t.partialPivLu().inverse();
  for (Eigen::Index j = 0; j < p.cols(); ++j) p.col(j).normalize();
  return p;
}

double diag_fraction(const ComplexMatrix& t) {
  if (t.rows() != t.cols()) throw ValidationError("diag_fraction needs a square matrix");
  const double total = t.squaredNorm();
  if (!(total > 0.0)) throw ValidationError("diag_fraction of a zero matrix");
  return t.diagonal().squaredNorm() / total;
}

Detection detect_known_modes(const ModeLabel& label, const ModeBasis& source,
                             const ModeBasis& target) {
  const auto src = source.find(label);
  if (!src) throw ValidationError(label.str() + " is not guided by the source fiber");
  if (!target.find(label)) throw ValidationError(label.str() + " is not guided by the target fiber");
  if (source.grid_side() != target.grid_side())
    throw ValidationError("source and target bases must share the pixel grid");

  const auto pixels = static_cast<Eigen::Index>(target.field(0).size());
  const auto n = static_cast<Eigen::Index>(target.size());
  Eigen::MatrixXd b(pixels, n);
  for (Eigen::Index i = 0; i < n; ++i)
    b.col(i) = Eigen::Map<const Eigen::VectorXd>(target.field(static_cast<std::size_t>(i)).values().data(), pixels);
  const Eigen::Map<const Eigen::VectorXd> f(source.field(*src).values().data(), pixels);

  // Normal equations; the pixel area cancels.
  const Eigen::MatrixXd gram = b.transpose() * b;
  const Eigen::VectorXd rhs = b.transpose() * f;
  const Eigen::VectorXd c = gram.ldlt().solve(rhs);

  Detection d;
  d.amplitudes.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d.amplitudes[static_cast<std::size_t>(i)] = std::abs(c(i));
  Eigen::Index best = 0;
  c.cwiseAbs().maxCoeff(&best);
  d.index = static_cast<std::size_t>(best);
  return d;
}

}  // namespace mmfmd
