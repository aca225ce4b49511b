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

// Dense vectors and matrices, the error function, and seeded random streams.
// Everything here is 64-bit floating point.

#ifndef FAIRDP_LINALG_H_
#define FAIRDP_LINALG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fairdp::linalg {

using Vec = std::vector<double>;

// Row-major dense matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, Vec data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const Vec& data() const { return data_; }
  Vec& data() { return data_; }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

double inner(std::span<const double> u, std::span<const double> v);
double l2_norm(std::span<const double> v);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> v);
Vec add(std::span<const double> u, std::span<const double> v);
Vec subtract(std::span<const double> u, std::span<const double> v);

// m * v
Vec matvec(const Mat& m, std::span<const double> v);
Mat transpose(const Mat& m);

bool all_finite(std::span<const double> v);

// Error function, odd-symmetric by construction.
double erf(double x);

double sigmoid(double x);

// Independent random stream. Two streams built from the same (seed, stream_id)
// produce identical draw sequences.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Uniform on [0, 1).
  double uniform();
  double standard_normal();
  bool bernoulli(double p);
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// n i.i.d. N(mean, std^2) draws.
Vec gaussian(RngStream& rng, double mean, double std, std::size_t n);
// n i.i.d. Laplace(0, scale) draws.
Vec laplace(RngStream& rng, double scale, std::size_t n);

}  // namespace fairdp::linalg

#endif  // FAIRDP_LINALG_H_
