// Copyright 2026 The IPRG Authors
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

// Dense scoring kernels behind exact passage search. Rows of `vectors` are
// passage embeddings; all accumulation happens in double regardless of the
// storage scalar.

#ifndef IPRG_LINALG_HPP_
#define IPRG_LINALG_HPP_

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace iprg {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
Eigen::VectorXd row_norms(const Eigen::MatrixBase<Derived>& vectors) {
  Eigen::VectorXd norms(vectors.rows());
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    norms(i) = vectors.row(i).template cast<double>().norm();
  }
  return norms;
}

/// Cosine of every row against `query`. Rows or queries of zero norm score 0.
/// Every row goes through the same kernel, so equal rows get bit-equal
/// scores.
template <typename MatrixDerived, typename VectorDerived>
Eigen::VectorXd cosine_scores(const Eigen::MatrixBase<MatrixDerived>& vectors,
                              const Eigen::VectorXd& norms,
                              const Eigen::MatrixBase<VectorDerived>& query) {
  const Eigen::VectorXd q = query.template cast<double>();
  const double q_norm = q.norm();
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(vectors.rows());
  if (q_norm == 0.0) return scores;
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    if (norms(i) == 0.0) continue;
    const double dot = vectors.row(i).template cast<double>().dot(q.transpose());
    scores(i) = std::clamp(dot / (norms(i) * q_norm), -1.0, 1.0);
  }
  return scores;
}

/// Scores closer than this are one tie; summation order alone must never
/// reorder mathematically equal passages.
inline constexpr double kScoreTieTolerance = 1e-12;

/// Indices of the `k` best scores, best first. Ties (within
/// kScoreTieTolerance of the preceding score) go to the smaller key under
/// `key_less`.
template <typename KeyLess>
std::vector<std::size_t> top_k(const Eigen::VectorXd& scores, std::size_t k,
                               KeyLess key_less) {
  const std::size_t n = static_cast<std::size_t>(scores.size());
  k = std::min(k, n);
  if (k == 0) return {};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> pool;
  if (k < n) {
    // Anything that can tie with the k-th score stays in the pool.
    std::vector<double> sorted(scores.data(), scores.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(),
                     std::greater<double>());
    const double cutoff = sorted[k - 1] - 2 * kScoreTieTolerance;
    for (std::size_t i : order) {
      if (scores(i) >= cutoff) pool.push_back(i);
    }
  } else {
    pool = std::move(order);
  }

  std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return key_less(a, b);
  });
  // Reorder each run of near-equal scores by key.
  std::size_t run = 0;
  for (std::size_t i = 1; i <= pool.size(); ++i) {
    if (i == pool.size() || scores(pool[i - 1]) - scores(pool[i]) > kScoreTieTolerance) {
      std::sort(pool.begin() + run, pool.begin() + i, key_less);
      run = i;
    }
  }
  pool.resize(k);
  return pool;
}

}  // namespace iprg

#endif  // IPRG_LINALG_HPP_
