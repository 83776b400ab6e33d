// Copyright 2026 The Groupfill Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Ergodic rate of diagonal (independent per-antenna) signaling.
//
// For unit-mean exponential gains (|h|^2 with h ~ CN(0,1)) the per-antenna
// term has the closed form
//
//   E{ln(1 + g p)} = -e^{1/p} Ei(-1/p) = e^{1/p} E1(1/p),
//
// and every ensemble can also be estimated by seeded Monte-Carlo.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "groupfill/error.hpp"
#include "groupfill/parallel.hpp"
#include "groupfill/random.hpp"

namespace groupfill {

namespace detail {

// E1(z) for 0 < z <= 1 by its power series.
inline double e1_series(double z) {
  double sum = 0.0;
  double term = 1.0;  // (-z)^k / k!
  for (int k = 1; k < 200; ++k) {
    term *= -z / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return -std::numbers::egamma - std::log(z) - sum;
}

// e^z E1(z) for z > 1 by the continued fraction, modified Lentz.
inline double scaled_e1_fraction(double z) {
  constexpr double kTiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

// e^z E1(z) without forming e^z for large z.
inline double scaled_e1(double z) {
  return z <= 1.0 ? std::exp(z) * e1_series(z) : scaled_e1_fraction(z);
}

}  // namespace detail

/// Exponential integral Ei(x) = int_{-inf}^x e^t/t dt on the negative axis.
/// Throws DomainError for x >= 0.
inline double expint_ei(double x) {
  if (!(x < 0.0)) {
    throw Error(ErrorCode::kDomainError, "expint_ei is defined here for x < 0 only");
  }
  const double z = -x;
  if (z <= 1.0) return -detail::e1_series(z);
  return -detail::scaled_e1_fraction(z) * std::exp(-z);
}

/// E{ln(1 + g p)} for g unit-mean exponential.
inline double expected_log_rayleigh(double p) {
  if (p <= 0.0) return 0.0;
  // E ln(1+gp) = p E g - p^2 E g^2 / 2 + O(p^3) = p - p^2 + O(p^3).
  if (p < 1e-8) return p - p * p;
  return detail::scaled_e1(1.0 / p);
}

/// Sum_i E{ln(1 + g_i p_i)} with i.i.d. unit-mean exponential g_i.
inline double ergodic_capacity_closed_form(std::span<const double> powers) {
  double c = 0.0;
  for (double p : powers) c += expected_log_rayleigh(p);
  return c;
}

/// Sum_i ln(1 + E{g_i} p_i), an upper bound on the ergodic rate by Jensen.
inline double jensen_upper_bound(std::span<const double> powers,
                                 std::span<const double> mean_gains) {
  if (powers.size() != mean_gains.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "powers and mean gains differ in length");
  }
  double c = 0.0;
  for (std::size_t i = 0; i < powers.size(); ++i) c += std::log1p(mean_gains[i] * powers[i]);
  return c;
}

enum class ChannelKind { kOrthogonalIid, kRayleighMiso, kRayleighMimo };

/// Scalar law of the per-antenna gain for the orthogonal ensemble.
struct ScalarLaw {
  std::string name;
  std::function<double(SampleStream&)> draw;
  bool unit_exponential = false;

  static ScalarLaw exponential() {
    return ScalarLaw{"exponential", [](SampleStream& s) { return s.exponential(); }, true};
  }
};

/// A stochastic channel model plus the seed of its sample streams.
class ChannelEnsemble {
 public:
  static ChannelEnsemble orthogonal_iid(std::size_t m, std::uint64_t seed,
                                        ScalarLaw law = ScalarLaw::exponential()) {
    return ChannelEnsemble(ChannelKind::kOrthogonalIid, m, m, std::move(law), seed);
  }
  static ChannelEnsemble rayleigh_miso(std::size_t m, std::uint64_t seed) {
    return ChannelEnsemble(ChannelKind::kRayleighMiso, 1, m, ScalarLaw::exponential(), seed);
  }
  static ChannelEnsemble rayleigh_mimo(std::size_t n, std::size_t m, std::uint64_t seed) {
    return ChannelEnsemble(ChannelKind::kRayleighMimo, n, m, ScalarLaw::exponential(), seed);
  }

  ChannelKind kind() const noexcept { return kind_; }
  std::size_t receive() const noexcept { return rx_; }
  std::size_t transmit() const noexcept { return tx_; }
  const ScalarLaw& law() const noexcept { return law_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::string describe() const {
    switch (kind_) {
      case ChannelKind::kOrthogonalIid:
        return "orth-iid(m=" + std::to_string(tx_) + ", law=" + law_.name + ")";
      case ChannelKind::kRayleighMiso:
        return "rayleigh-miso(m=" + std::to_string(tx_) + ")";
      case ChannelKind::kRayleighMimo:
        return "rayleigh-mimo(" + std::to_string(rx_) + "x" + std::to_string(tx_) + ")";
    }
    return "unknown";
  }

 private:
  ChannelEnsemble(ChannelKind kind, std::size_t rx, std::size_t tx, ScalarLaw law,
                  std::uint64_t seed)
      : kind_(kind), rx_(rx), tx_(tx), law_(std::move(law)), seed_(seed) {
    if (rx_ == 0 || tx_ == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "ensemble dimensions must be positive");
    }
    if (kind_ == ChannelKind::kRayleighMimo && (rx_ > 64 || tx_ > 64)) {
      throw Error(ErrorCode::kDimensionMismatch, "MIMO ensembles support up to 64x64");
    }
    if (!law_.draw) throw Error(ErrorCode::kDomainError, "scalar law has no sampler");
  }

  ChannelKind kind_;
  std::size_t rx_;
  std::size_t tx_;
  ScalarLaw law_;
  std::uint64_t seed_;
};

/// Gains (orthogonal ensemble) or a complex channel matrix (MISO: 1 x m,
/// MIMO: n x m).
using ChannelSample = std::variant<std::vector<double>, Eigen::MatrixXcd>;

/// The sample_index-th draw of the ensemble. Draws are a pure function of
/// (seed, sample_index).
inline ChannelSample sample_gains(const ChannelEnsemble& ensemble, std::uint64_t sample_index) {
  SampleStream stream(ensemble.seed(), sample_index);
  if (ensemble.kind() == ChannelKind::kOrthogonalIid) {
    std::vector<double> g(ensemble.transmit());
    for (auto& v : g) v = ensemble.law().draw(stream);
    return g;
  }
  Eigen::MatrixXcd h(ensemble.receive(), ensemble.transmit());
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = stream.complex_normal();
  }
  return h;
}

/// Rate of one channel draw under diagonal signaling D(p):
/// sum_i ln(1 + g_i p_i), ln(1 + sum_i |h_i|^2 p_i) or ln|I + H D(p) H^+|.
inline double sample_rate(const ChannelEnsemble& ensemble, std::span<const double> powers,
                          std::uint64_t sample_index) {
  SampleStream stream(ensemble.seed(), sample_index);
  switch (ensemble.kind()) {
    case ChannelKind::kOrthogonalIid: {
      double rate = 0.0;
      for (double p : powers) rate += std::log1p(ensemble.law().draw(stream) * p);
      return rate;
    }
    case ChannelKind::kRayleighMiso: {
      double snr = 0.0;
      for (double p : powers) snr += std::norm(stream.complex_normal()) * p;
      return std::log1p(snr);
    }
    case ChannelKind::kRayleighMimo: {
      const auto n = static_cast<Eigen::Index>(ensemble.receive());
      const auto m = static_cast<Eigen::Index>(ensemble.transmit());
      Eigen::MatrixXcd h(n, m);
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) h(r, c) = stream.complex_normal();
      }
      Eigen::VectorXd p(m);
      for (Eigen::Index c = 0; c < m; ++c) p(c) = powers[static_cast<std::size_t>(c)];
      Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
      a.noalias() += h * p.cast<std::complex<double>>().asDiagonal() * h.adjoint();
      Eigen::LLT<Eigen::MatrixXcd> llt(a);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::kDomainError, "I + H D H^+ is not positive definite");
      }
      double logdet = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) logdet += std::log(llt.matrixL()(k, k).real());
      return 2.0 * logdet;
    }
  }
  return 0.0;
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const RunningMoments& other) {
    if (other.count == 0.0) return;
    const double total = count + other.count;
    const double delta = other.mean - mean;
    mean += delta * other.count / total;
    m2 += other.m2 + delta * delta * count * other.count / total;
    count = total;
  }
};

inline constexpr std::size_t kMonteCarloBlock = 4096;

}  // namespace detail

/// Monte-Carlo mean of sample_rate over samples 0..N-1. Blocks of samples are
/// reduced in block order, so the estimate is bit-identical for any worker
/// count.
inline MonteCarloEstimate ergodic_capacity_mc(const ChannelEnsemble& ensemble,
                                              std::span<const double> powers, std::size_t n,
                                              std::size_t workers = worker_count()) {
  if (powers.size() != ensemble.transmit()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "allocation has " + std::to_string(powers.size()) + " entries, ensemble has " +
                    std::to_string(ensemble.transmit()) + " transmit antennas");
  }
  if (n == 0) throw Error(ErrorCode::kDomainError, "sample count must be positive");

  const std::size_t blocks = (n + detail::kMonteCarloBlock - 1) / detail::kMonteCarloBlock;
  std::vector<detail::RunningMoments> partial(blocks);
  parallel_for_blocks(
      blocks,
      [&](std::size_t b) {
        const std::size_t begin = b * detail::kMonteCarloBlock;
        const std::size_t end = std::min(n, begin + detail::kMonteCarloBlock);
        detail::RunningMoments acc;
        for (std::size_t k = begin; k < end; ++k) acc.add(sample_rate(ensemble, powers, k));
        partial[b] = acc;
      },
      workers);

  detail::RunningMoments total;
  for (const auto& block : partial) total.merge(block);

  MonteCarloEstimate est;
  est.mean = total.mean;
  est.samples = n;
  est.seed = ensemble.seed();
  est.std_error = n > 1 ? std::sqrt(total.m2 / static_cast<double>(n - 1)) /
                              std::sqrt(static_cast<double>(n))
                        : 0.0;
  return est;
}

/// Closed form for an orthogonal ensemble; only valid for the exponential law.
inline double ergodic_capacity_closed_form(const ChannelEnsemble& ensemble,
                                           std::span<const double> powers) {
  if (ensemble.kind() != ChannelKind::kOrthogonalIid || !ensemble.law().unit_exponential) {
    throw Error(ErrorCode::kDomainError,
                "closed form needs the orthogonal ensemble with unit-mean exponential gains");
  }
  if (powers.size() != ensemble.transmit()) {
    throw Error(ErrorCode::kDimensionMismatch, "allocation and ensemble differ in size");
  }
  return ergodic_capacity_closed_form(powers);
}

}  // namespace groupfill
