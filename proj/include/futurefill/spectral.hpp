#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "futurefill/engines.hpp"
#include "futurefill/rng.hpp"
#include "futurefill/signal.hpp"

namespace futurefill {

/// Largest L accepted by the dense eigensolver.
inline constexpr std::size_t kMaxEigensolveLength = 4096;

/// Entry (i, j), 1-based, of H_L = int_0^1 mu mu^T, mu = (a-1)[1, a, ..., a^{L-1}]:
/// int_0^1 (a-1)^2 a^{i+j-2} da = 2 / ((i+j)^3 - (i+j)).
double hankel_entry(std::size_t i, std::size_t j);

Eigen::MatrixXd hankel_matrix(std::size_t length);

struct SpectralFilterBank {
  std::size_t length = 0;
  /// Each of size `length`.
  std::vector<Signal> filters;
  /// Descending; empty for randomly drawn banks.
  std::vector<double> eigenvalues;

  std::size_t count() const noexcept { return filters.size(); }
  /// length x count, filter i in column i.
  Eigen::MatrixXd as_matrix() const;
};

/// Top-k unit-norm eigenvectors of H_L, eigenvalue-descending, each signed so
/// its largest-magnitude coordinate is positive. Requires 1 <= k <= L <= 4096.
SpectralFilterBank spectral_filters(std::size_t length, std::size_t k);

/// k filters with i.i.d. uniform(-1, 1) taps, normalized to unit norm.
SpectralFilterBank random_filter_bank(std::size_t length, std::size_t k, Rng& rng);

// CSV: first line "L,k", then L rows of k comma-separated values.
void write_filter_bank_csv(std::ostream& out, const SpectralFilterBank& bank);
SpectralFilterBank read_filter_bank_csv(std::istream& in, const std::string& source = "<stream>");
void save_filter_bank(const std::filesystem::path& path, const SpectralFilterBank& bank);
SpectralFilterBank load_filter_bank(const std::filesystem::path& path);

enum class StuMode { full, tensordot };

/// Convolutional predictor over a filter bank.
///
/// full:      y_t = sum_i M_i [u * phi_i]_t,  M_i is d_out x d_in.
/// tensordot: y_t = [ (M2 u) (*) Phi^T M1 ]_t per coordinate, M1 is k x d,
///            M2 is d x d; one scalar convolution per dimension.
struct StuModel {
  SpectralFilterBank bank;
  StuMode mode = StuMode::full;
  std::vector<Eigen::MatrixXd> projections;
  Eigen::MatrixXd m1;
  Eigen::MatrixXd m2;

  static StuModel full(SpectralFilterBank bank, std::vector<Eigen::MatrixXd> projections);
  static StuModel tensordot(SpectralFilterBank bank, Eigen::MatrixXd m1, Eigen::MatrixXd m2);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  /// Throws ConfigError on inconsistent shapes.
  void validate() const;
  /// L x d matrix Phi^T M1 (tensordot mode).
  Eigen::MatrixXd tensordot_filters() const;
  /// Full-mode model with M_i = diag(M1[i, :]) * M2, same outputs as this
  /// tensordot model.
  StuModel expanded() const;
};

/// Streams a StuModel step by step through online engines: k * d_in engines
/// in full mode, d engines in tensordot mode.
class StuRunner {
 public:
  StuRunner(StuModel model, const EngineConfig& engine, std::size_t horizon);

  Eigen::VectorXd step(const Eigen::VectorXd& input);

  /// Online gradient descent on ||y - y_hat||^2 (full mode): predicts with
  /// the current projections, then M_i -= eta * 2 (y_hat - y) F_i^T.
  /// Returns the loss suffered; `prediction` receives y_hat if non-null.
  double ogd_step(const Eigen::VectorXd& input, const Eigen::VectorXd& target, double eta,
                  Eigen::VectorXd* prediction = nullptr);

  /// Row i holds F_i = [u * phi_i]_t for the last step (full mode).
  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const StuModel& model() const noexcept { return model_; }
  std::size_t steps() const noexcept { return steps_; }
  CostMeter meter() const;

 private:
  StuModel model_;
  std::vector<std::unique_ptr<OnlineConvEngine>> engines_;
  Eigen::MatrixXd features_;
  std::size_t steps_ = 0;
};

/// Batch evaluation for a whole input stream (rows = time): one full
/// convolution per (filter, coordinate), then the projections.
Eigen::MatrixXd stu_forward_batch(const StuModel& model, const Eigen::MatrixXd& inputs);

/// ||y - sum_i M_i F_i||^2 for explicit features (row i = F_i).
double stu_loss(const std::vector<Eigen::MatrixXd>& projections, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& target);

/// Analytic gradient of stu_loss with respect to each M_i.
std::vector<Eigen::MatrixXd> stu_loss_gradient(const std::vector<Eigen::MatrixXd>& projections,
                                               const Eigen::MatrixXd& features,
                                               const Eigen::VectorXd& target);

}  // namespace futurefill
