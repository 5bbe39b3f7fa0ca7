#include "futurefill/spectral.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "futurefill/conv.hpp"
#include "futurefill/errors.hpp"
#include "futurefill/sequence_io.hpp"

namespace futurefill {

double hankel_entry(std::size_t i, std::size_t j) {
  if (i < 1 || j < 1) throw ContractViolation("hankel_entry: indices are 1-based");
  const double m = static_cast<double>(i + j);
  return 2.0 / ((m - 1.0) * m * (m + 1.0));
}

Eigen::MatrixXd hankel_matrix(std::size_t length) {
  Eigen::MatrixXd h(length, length);
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t j = 0; j < length; ++j) h(i, j) = hankel_entry(i + 1, j + 1);
  }
  return h;
}

Eigen::MatrixXd SpectralFilterBank::as_matrix() const {
  Eigen::MatrixXd out(length, filters.size());
  for (std::size_t i = 0; i < filters.size(); ++i) {
    for (std::size_t s = 0; s < length; ++s) out(s, i) = filters[i][s];
  }
  return out;
}

namespace {

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

Signal to_signal(const Eigen::VectorXd& v) {
  return Signal(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

SpectralFilterBank spectral_filters(std::size_t length, std::size_t k) {
  if (k < 1 || k > length) {
    throw ConfigError("spectral_filters: need 1 <= k <= L, got k=" + std::to_string(k) +
                      ", L=" + std::to_string(length));
  }
  if (length > kMaxEigensolveLength) {
    throw ConfigError("spectral_filters: L=" + std::to_string(length) +
                      " exceeds the dense eigensolve cap of " +
                      std::to_string(kMaxEigensolveLength));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hankel_matrix(length));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spectral_filters: eigensolver did not converge");
  }
  SpectralFilterBank bank;
  bank.length = length;
  const auto n = static_cast<Eigen::Index>(length);
  for (std::size_t i = 0; i < k; ++i) {
    const Eigen::Index col = n - 1 - static_cast<Eigen::Index>(i);
    Eigen::VectorXd v = solver.eigenvectors().col(col).normalized();
    fix_sign(v);
    bank.filters.push_back(to_signal(v));
    // H is PSD; round-off can leave the tail a few ulps below zero.
    bank.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(col)));
  }
  return bank;
}

SpectralFilterBank random_filter_bank(std::size_t length, std::size_t k, Rng& rng) {
  if (length == 0 || k == 0) throw ConfigError("random_filter_bank: empty shape");
  SpectralFilterBank bank;
  bank.length = length;
  for (std::size_t i = 0; i < k; ++i) {
    Eigen::VectorXd v(length);
    for (std::size_t s = 0; s < length; ++s) v(static_cast<Eigen::Index>(s)) = rng.uniform(-1.0, 1.0);
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    bank.filters.push_back(to_signal(v));
  }
  return bank;
}

void write_filter_bank_csv(std::ostream& out, const SpectralFilterBank& bank) {
  out << bank.length << ',' << bank.count() << '\n';
  for (std::size_t s = 0; s < bank.length; ++s) {
    for (std::size_t i = 0; i < bank.count(); ++i) {
      if (i > 0) out << ',';
      out << format_double(bank.filters[i][s]);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    parts.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view text, const std::string& source, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0) {
    throw ParseError(source, line, "expected a positive integer, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

SpectralFilterBank read_filter_bank_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing 'L,k' header");
  const auto header = split_commas(strip_cr(line));
  if (header.size() != 2) throw ParseError(source, 1, "header must be 'L,k'");
  const std::size_t length = parse_count(header[0], source, 1);
  const std::size_t k = parse_count(header[1], source, 1);

  std::vector<std::vector<double>> columns(k, std::vector<double>(length));
  for (std::size_t s = 0; s < length; ++s) {
    const std::size_t lineno = s + 2;
    if (!std::getline(in, line)) throw ParseError(source, lineno, "missing row");
    const auto fields = split_commas(strip_cr(line));
    if (fields.size() != k) {
      throw ParseError(source, lineno, "expected " + std::to_string(k) + " values, got " +
                                           std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (!parse_double(fields[i], columns[i][s])) {
        throw ParseError(source, lineno, "bad value '" + std::string(fields[i]) + "'");
      }
    }
  }
  SpectralFilterBank bank;
  bank.length = length;
  for (auto& col : columns) bank.filters.emplace_back(std::move(col));
  return bank;
}

void save_filter_bank(const std::filesystem::path& path, const SpectralFilterBank& bank) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_filter_bank_csv(out, bank);
  if (!out) throw IoError("write failed for " + path.string());
}

SpectralFilterBank load_filter_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_filter_bank_csv(in, path.string());
}

StuModel StuModel::full(SpectralFilterBank bank, std::vector<Eigen::MatrixXd> projections) {
  StuModel m;
  m.bank = std::move(bank);
  m.mode = StuMode::full;
  m.projections = std::move(projections);
  m.validate();
  return m;
}

StuModel StuModel::tensordot(SpectralFilterBank bank, Eigen::MatrixXd m1, Eigen::MatrixXd m2) {
  StuModel m;
  m.bank = std::move(bank);
  m.mode = StuMode::tensordot;
  m.m1 = std::move(m1);
  m.m2 = std::move(m2);
  m.validate();
  return m;
}

std::size_t StuModel::input_dim() const {
  if (mode == StuMode::tensordot) return static_cast<std::size_t>(m2.cols());
  return projections.empty() ? 0 : static_cast<std::size_t>(projections.front().cols());
}

std::size_t StuModel::output_dim() const {
  if (mode == StuMode::tensordot) return static_cast<std::size_t>(m2.rows());
  return projections.empty() ? 0 : static_cast<std::size_t>(projections.front().rows());
}

void StuModel::validate() const {
  const std::size_t k = bank.count();
  if (k == 0 || bank.length == 0) throw ConfigError("StuModel: empty filter bank");
  for (const auto& f : bank.filters) {
    if (f.size() != bank.length) throw ConfigError("StuModel: filter length mismatch");
  }
  if (mode == StuMode::full) {
    if (projections.size() != k) {
      throw ConfigError("StuModel: " + std::to_string(projections.size()) +
                        " projections for " + std::to_string(k) + " filters");
    }
    for (const auto& p : projections) {
      if (p.rows() == 0 || p.cols() == 0 || p.rows() != projections.front().rows() ||
          p.cols() != projections.front().cols()) {
        throw ConfigError("StuModel: projection shapes differ or are empty");
      }
    }
  } else {
    if (m2.rows() == 0 || m2.rows() != m2.cols()) throw ConfigError("StuModel: M2 must be d x d");
    if (static_cast<std::size_t>(m1.rows()) != k || m1.cols() != m2.rows()) {
      throw ConfigError("StuModel: M1 must be k x d");
    }
  }
}

Eigen::MatrixXd StuModel::tensordot_filters() const { return bank.as_matrix() * m1; }

StuModel StuModel::expanded() const {
  if (mode != StuMode::tensordot) throw ConfigError("expanded: model is not in tensordot mode");
  std::vector<Eigen::MatrixXd> mats;
  for (Eigen::Index i = 0; i < m1.rows(); ++i) mats.push_back(m1.row(i).asDiagonal() * m2);
  return full(bank, std::move(mats));
}

StuRunner::StuRunner(StuModel model, const EngineConfig& engine, std::size_t horizon)
    : model_(std::move(model)) {
  model_.validate();
  const std::size_t k = model_.bank.count();
  const std::size_t d_in = model_.input_dim();
  if (model_.mode == StuMode::full) {
    for (std::size_t i = 0; i < k; ++i) {
      const Filter phi(model_.bank.filters[i]);
      for (std::size_t c = 0; c < d_in; ++c) engines_.push_back(make_engine(engine, phi, horizon));
    }
    features_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d_in));
  } else {
    const Eigen::MatrixXd columns = model_.tensordot_filters();
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
      std::vector<double> taps(columns.rows());
      for (Eigen::Index s = 0; s < columns.rows(); ++s) taps[static_cast<std::size_t>(s)] = columns(s, c);
      engines_.push_back(make_engine(engine, Filter(Signal(std::move(taps))), horizon));
    }
  }
}

Eigen::VectorXd StuRunner::step(const Eigen::VectorXd& input) {
  if (static_cast<std::size_t>(input.size()) != model_.input_dim()) {
    throw ConfigError("StuRunner::step: input has dimension " + std::to_string(input.size()) +
                      ", model expects " + std::to_string(model_.input_dim()));
  }
  ++steps_;
  if (model_.mode == StuMode::full) {
    const auto d_in = input.size();
    for (Eigen::Index i = 0; i < features_.rows(); ++i) {
      for (Eigen::Index c = 0; c < d_in; ++c) {
        features_(i, c) = engines_[static_cast<std::size_t>(i * d_in + c)]->push(input(c));
      }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model_.output_dim()));
    for (Eigen::Index i = 0; i < features_.rows(); ++i) {
      out.noalias() += model_.projections[static_cast<std::size_t>(i)] * features_.row(i).transpose();
    }
    return out;
  }
  const Eigen::VectorXd projected = model_.m2 * input;
  Eigen::VectorXd out(projected.size());
  for (Eigen::Index c = 0; c < projected.size(); ++c) {
    out(c) = engines_[static_cast<std::size_t>(c)]->push(projected(c));
  }
  return out;
}

double StuRunner::ogd_step(const Eigen::VectorXd& input, const Eigen::VectorXd& target, double eta,
                           Eigen::VectorXd* prediction) {
  if (model_.mode != StuMode::full) throw ConfigError("ogd_step: full mode only");
  if (!(eta > 0.0)) throw ConfigError("ogd_step: learning rate must be positive");
  if (static_cast<std::size_t>(target.size()) != model_.output_dim()) {
    throw ConfigError("ogd_step: target dimension mismatch");
  }
  const Eigen::VectorXd y_hat = step(input);
  const Eigen::VectorXd residual = y_hat - target;
  for (Eigen::Index i = 0; i < features_.rows(); ++i) {
    model_.projections[static_cast<std::size_t>(i)].noalias() -=
        (2.0 * eta) * residual * features_.row(i);
  }
  if (prediction != nullptr) *prediction = y_hat;
  return residual.squaredNorm();
}

CostMeter StuRunner::meter() const {
  CostMeter total;
  for (const auto& e : engines_) total = combine_concurrent(total, e->meter());
  return total;
}

Eigen::MatrixXd stu_forward_batch(const StuModel& model, const Eigen::MatrixXd& inputs) {
  model.validate();
  const Eigen::Index steps = inputs.rows();
  const auto column_conv = [steps](const Eigen::VectorXd& u, const Signal& phi) {
    const Signal full = conv_full(Signal(std::vector<double>(u.data(), u.data() + u.size())), phi);
    Eigen::VectorXd out(steps);
    for (Eigen::Index t = 0; t < steps; ++t) out(t) = full.at(t + 1);
    return out;
  };

  if (model.mode == StuMode::full) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(steps, static_cast<Eigen::Index>(model.output_dim()));
    for (std::size_t i = 0; i < model.bank.count(); ++i) {
      Eigen::MatrixXd feats(steps, inputs.cols());
      for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
        feats.col(c) = column_conv(inputs.col(c), model.bank.filters[i]);
      }
      out.noalias() += feats * model.projections[i].transpose();
    }
    return out;
  }
  const Eigen::MatrixXd projected = inputs * model.m2.transpose();
  const Eigen::MatrixXd columns = model.tensordot_filters();
  Eigen::MatrixXd out(steps, projected.cols());
  for (Eigen::Index c = 0; c < projected.cols(); ++c) {
    const Eigen::VectorXd col = columns.col(c);
    out.col(c) = column_conv(projected.col(c),
                             Signal(std::vector<double>(col.data(), col.data() + col.size())));
  }
  return out;
}

double stu_loss(const std::vector<Eigen::MatrixXd>& projections, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& target) {
  Eigen::VectorXd y_hat = Eigen::VectorXd::Zero(target.size());
  for (std::size_t i = 0; i < projections.size(); ++i) {
    y_hat.noalias() += projections[i] * features.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return (target - y_hat).squaredNorm();
}

std::vector<Eigen::MatrixXd> stu_loss_gradient(const std::vector<Eigen::MatrixXd>& projections,
                                               const Eigen::MatrixXd& features,
                                               const Eigen::VectorXd& target) {
  Eigen::VectorXd y_hat = Eigen::VectorXd::Zero(target.size());
  for (std::size_t i = 0; i < projections.size(); ++i) {
    y_hat.noalias() += projections[i] * features.row(static_cast<Eigen::Index>(i)).transpose();
  }
  const Eigen::VectorXd residual = y_hat - target;
  std::vector<Eigen::MatrixXd> grads;
  for (std::size_t i = 0; i < projections.size(); ++i) {
    grads.push_back(2.0 * residual * features.row(static_cast<Eigen::Index>(i)));
  }
  return grads;
}

}  // namespace futurefill
