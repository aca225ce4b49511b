// Copyright 2026 The FairDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairdp/linalg.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairdp/error.h"

namespace fairdp {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kDegenerateGroup: return "degenerate-group";
    case ErrorKind::kEmptyEvent: return "empty-event";
    case ErrorKind::kContractViolation: return "contract-violation";
    case ErrorKind::kCalibration: return "calibration";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kMismatch: return "mismatch";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

namespace linalg {
namespace {

void require_same_size(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(op) + ": size " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, Vec data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_same_size(rows_ * cols_, data_.size(), "Mat");
}

double inner(std::span<const double> u, std::span<const double> v) {
  require_same_size(u.size(), v.size(), "inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double l2_norm(std::span<const double> v) {
  // Scaled accumulation keeps huge or tiny entries from overflowing.
  double scale_ = 0.0;
  for (double x : v) scale_ = std::max(scale_, std::abs(x));
  if (scale_ == 0.0) return 0.0;
  double acc = 0.0;
  for (double x : v) {
    const double r = x / scale_;
    acc += r * r;
  }
  return scale_ * std::sqrt(acc);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> v) {
  for (double& x : v) x *= a;
}

Vec add(std::span<const double> u, std::span<const double> v) {
  require_same_size(u.size(), v.size(), "add");
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + v[i];
  return out;
}

Vec subtract(std::span<const double> u, std::span<const double> v) {
  require_same_size(u.size(), v.size(), "subtract");
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - v[i];
  return out;
}

Vec matvec(const Mat& m, std::span<const double> v) {
  require_same_size(m.cols(), v.size(), "matvec");
  Vec out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

Mat transpose(const Mat& m) {
  Mat t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double erf(double x) {
  const double y = std::erf(std::abs(x));
  return std::signbit(x) ? -y : y;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  // 53 random bits mapped onto [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::standard_normal() { return normal_(engine_); }

bool RngStream::bernoulli(double p) {
  if (p >= 1.0) return true;
  return uniform() < p;
}

Vec gaussian(RngStream& rng, double mean, double std, std::size_t n) {
  if (!(std >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "gaussian: std must be >= 0");
  }
  Vec out(n, mean);
  if (std == 0.0) return out;
  for (double& x : out) x = mean + std * rng.standard_normal();
  return out;
}

Vec laplace(RngStream& rng, double scale_, std::size_t n) {
  if (!(scale_ > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "laplace: scale must be > 0");
  }
  Vec out(n);
  for (double& x : out) {
    // Inverse CDF on u in (-1/2, 1/2); u = -1/2 exactly is excluded.
    double u;
    do {
      u = rng.uniform() - 0.5;
    } while (u == -0.5);
    x = u < 0.0 ? scale_ * std::log1p(2.0 * u) : -scale_ * std::log1p(-2.0 * u);
  }
  return out;
}

}  // namespace linalg
}  // namespace fairdp
