// Copyright 2026 The PACS Authors.
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

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pacs {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by iterative solvers; carries the residual trace seen so far.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> trace = {})
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

// Dense row-major matrix; rows are clients, columns are rounds.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  T* row(std::size_t r) { return data_.data() + r * cols_; }
  const T* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<T> row_vector(std::size_t r) const {
    return std::vector<T>(row(r), row(r) + cols_);
  }
  std::vector<T> col_vector(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  const std::vector<T>& data() const { return data_; }
  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;

// Integer power by repeated squaring; exact for small exponents.
template <typename T>
constexpr T ipow(T base, int exp) {
  T result = T(1);
  while (exp > 0) {
    if (exp & 1) result *= base;
    base *= base;
    exp >>= 1;
  }
  return result;
}

template <typename T>
constexpr T clamp_to(T v, T lo, T hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

inline void require_same_length(std::size_t a, std::size_t b,
                                const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch (" +
                     std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

// Kahan-compensated sum in index order.
template <typename It>
double stable_sum(It first, It last) {
  double sum = 0.0, comp = 0.0;
  for (; first != last; ++first) {
    const double y = static_cast<double>(*first) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace pacs
