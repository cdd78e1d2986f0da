#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "l2n2/types.hpp"

namespace l2n2 {

/// Squared Euclidean distance, accumulated in coordinate order so every search
/// path produces bit-identical values for the same pair.
template <typename Scalar>
inline Scalar squared_distance(const Scalar* a, const Scalar* b, Index dim) {
  Scalar acc = 0;
  for (Index c = 0; c < dim; ++c) {
    const Scalar diff = a[c] - b[c];
    acc += diff * diff;
  }
  return acc;
}

/// Ordered distances to the kmax nearest neighbors of each query point.
/// radii(r, m - 1) is R_m of point query[r]; the point itself is never its own
/// neighbor, but an exact duplicate is (at distance 0).
template <typename Scalar>
struct NeighborTableT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Matrix radii;
  IndexMatrix neighbors;
  std::vector<Index> query;  // cloud row of each table row
  int kmax = 0;

  Index rows() const { return radii.rows(); }

  /// Rows whose nearest neighbor sits at distance zero.
  Index duplicate_count() const {
    Index count = 0;
    for (Index r = 0; r < radii.rows(); ++r) count += radii(r, 0) == Scalar(0);
    return count;
  }
};
using NeighborTable = NeighborTableT<double>;

enum class KnnAlgorithm { Auto, KdTree, Brute };

namespace detail {

/// Fixed-capacity sorted buffer of the best (d2, index) pairs seen so far.
template <typename Scalar>
class BestK {
 public:
  explicit BestK(int k) : k_(k) { items_.reserve(static_cast<std::size_t>(k) + 1); }

  Scalar worst() const {
    return full() ? items_.back().first : std::numeric_limits<Scalar>::infinity();
  }
  bool full() const { return static_cast<int>(items_.size()) == k_; }

  void offer(Scalar d2, Index idx) {
    const std::pair<Scalar, Index> item{d2, idx};
    if (full() && !(item < items_.back())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), item);
    items_.insert(pos, item);
    if (static_cast<int>(items_.size()) > k_) items_.pop_back();
  }

  const std::vector<std::pair<Scalar, Index>>& items() const { return items_; }
  void clear() { items_.clear(); }

 private:
  int k_;
  std::vector<std::pair<Scalar, Index>> items_;
};

}  // namespace detail

/// Exact kd-tree over the rows of a point cloud. Splits on the widest
/// coordinate at the median; leaves hold up to leaf_size points.
template <typename Scalar>
class KdTreeT {
 public:
  explicit KdTreeT(const PointCloudT<Scalar>& cloud, int leaf_size = 16)
      : dim_(cloud.cols()), leaf_size_(std::max(1, leaf_size)) {
    const Index n = cloud.rows();
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), Index{0});
    nodes_.reserve(static_cast<std::size_t>(2 * n / leaf_size_ + 2));
    build(cloud, 0, n);
    points_.resize(n, dim_);
    for (Index p = 0; p < n; ++p) points_.row(p) = cloud.row(order_[static_cast<std::size_t>(p)]);
  }

  Index size() const { return points_.rows(); }
  Index dim() const { return dim_; }

  /// k nearest stored points to `point`, skipping the stored point with index
  /// `exclude` (pass -1 to keep all). Results are (squared distance, index),
  /// ordered by distance then index.
  std::vector<std::pair<Scalar, Index>> knn(const Scalar* point, int k, Index exclude = -1) const {
    detail::BestK<Scalar> best(k);
    search(0, point, exclude, best);
    return best.items();
  }

 private:
  struct Node {
    Index begin = 0, end = 0;
    Index split_dim = -1;  // -1 marks a leaf
    Scalar split = 0;
    Index left = -1, right = -1;
  };

  Index build(const PointCloudT<Scalar>& cloud, Index begin, Index end) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    Index best_dim = 0;
    Scalar best_spread = -1;
    for (Index c = 0; c < dim_; ++c) {
      Scalar lo = std::numeric_limits<Scalar>::infinity(), hi = -lo;
      for (Index p = begin; p < end; ++p) {
        const Scalar v = cloud(order_[static_cast<std::size_t>(p)], c);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = c;
      }
    }
    if (best_spread <= 0) return id;  // all coincident: keep as a leaf

    const Index mid = begin + (end - begin) / 2;
    auto first = order_.begin() + begin;
    std::nth_element(first, order_.begin() + mid, order_.begin() + end, [&](Index a, Index b) {
      return cloud(a, best_dim) < cloud(b, best_dim);
    });
    const Scalar split = cloud(order_[static_cast<std::size_t>(mid)], best_dim);

    const Index left = build(cloud, begin, mid);
    const Index right = build(cloud, mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.split_dim = best_dim;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  void search(Index id, const Scalar* q, Index exclude, detail::BestK<Scalar>& best) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.split_dim < 0) {
      for (Index p = node.begin; p < node.end; ++p) {
        const Index idx = order_[static_cast<std::size_t>(p)];
        if (idx == exclude) continue;
        best.offer(squared_distance(q, points_.row(p).data(), dim_), idx);
      }
      return;
    }
    // Left holds values <= split, right holds values >= split.
    const Scalar diff = q[node.split_dim] - node.split;
    const Index near = diff < 0 ? node.left : node.right;
    const Index far = diff < 0 ? node.right : node.left;
    search(near, q, exclude, best);
    if (diff * diff <= best.worst()) search(far, q, exclude, best);
  }

  Index dim_;
  Index leaf_size_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  PointCloudT<Scalar> points_;
};
using KdTree = KdTreeT<double>;

namespace detail {

template <typename Scalar>
void check_knn_args(const PointCloudT<Scalar>& cloud, int kmax, std::span<const Index> query) {
  validate_cloud(cloud);
  if (kmax < 1 || kmax >= cloud.rows())
    throw Error(ErrorCode::InvalidArgument, "kmax must satisfy 1 <= kmax < n, got kmax=" +
                                                std::to_string(kmax) +
                                                " with n=" + std::to_string(cloud.rows()));
  for (Index q : query)
    if (q < 0 || q >= cloud.rows())
      throw Error(ErrorCode::InvalidArgument, "query index " + std::to_string(q) + " out of range");
}

template <typename Scalar>
NeighborTableT<Scalar> empty_table(std::span<const Index> query, int kmax) {
  NeighborTableT<Scalar> table;
  table.kmax = kmax;
  table.query.assign(query.begin(), query.end());
  table.radii.resize(static_cast<Index>(query.size()), kmax);
  table.neighbors.resize(static_cast<Index>(query.size()), kmax);
  return table;
}

template <typename Scalar>
void store_row(NeighborTableT<Scalar>& table, Index row,
               const std::vector<std::pair<Scalar, Index>>& best) {
  for (int m = 0; m < table.kmax; ++m) {
    table.radii(row, m) = std::sqrt(best[static_cast<std::size_t>(m)].first);
    table.neighbors(row, m) = best[static_cast<std::size_t>(m)].second;
  }
}

}  // namespace detail

/// kd-tree search; exact.
template <typename Scalar>
NeighborTableT<Scalar> knn_kdtree(const PointCloudT<Scalar>& cloud, int kmax,
                                  std::span<const Index> query) {
  detail::check_knn_args(cloud, kmax, query);
  auto table = detail::empty_table<Scalar>(query, kmax);
  const KdTreeT<Scalar> tree(cloud);
  const Index rows = static_cast<Index>(query.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (Index r = 0; r < rows; ++r) {
    const Index q = query[static_cast<std::size_t>(r)];
    detail::store_row(table, r, tree.knn(cloud.row(q).data(), kmax, q));
  }
  return table;
}

/// Blocked brute force. Candidates are screened with the Gram-matrix form
/// |x|^2 + |y|^2 - 2<x,y> on centered data, widened by a rounding bound so no
/// true neighbor can be dropped, then re-ranked with exact distances.
template <typename Scalar>
NeighborTableT<Scalar> knn_brute(const PointCloudT<Scalar>& cloud, int kmax,
                                 std::span<const Index> query) {
  detail::check_knn_args(cloud, kmax, query);
  auto table = detail::empty_table<Scalar>(query, kmax);
  using Matrix = PointCloudT<Scalar>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Index n = cloud.rows();
  const Index dim = cloud.cols();
  const Matrix centered = cloud.rowwise() - cloud.colwise().mean();
  const Vector norms = centered.rowwise().squaredNorm();
  const Scalar max_norm = norms.maxCoeff();
  const Scalar tol = Scalar(8) * Scalar(dim + 4) * std::numeric_limits<Scalar>::epsilon();

  const Index rows = static_cast<Index>(query.size());
  const Index block = std::max<Index>(8, std::min<Index>(256, (Index{1} << 22) / std::max<Index>(n, 1)));

#pragma omp parallel
  {
    Matrix qblock(block, dim);
    Matrix gram(block, n);
    detail::BestK<Scalar> screen(kmax);
    detail::BestK<Scalar> exact(kmax);
#pragma omp for schedule(dynamic, 1)
    for (Index start = 0; start < rows; start += block) {
      const Index count = std::min(block, rows - start);
      for (Index b = 0; b < count; ++b)
        qblock.row(b) = centered.row(query[static_cast<std::size_t>(start + b)]);
      gram.topRows(count).noalias() = qblock.topRows(count) * centered.transpose();

      for (Index b = 0; b < count; ++b) {
        const Index q = query[static_cast<std::size_t>(start + b)];
        const Scalar qn = norms(q);
        const Scalar* g = gram.row(b).data();

        screen.clear();
        for (Index p = 0; p < n; ++p) {
          if (p == q) continue;
          const Scalar approx = qn + norms(p) - Scalar(2) * g[p];
          if (approx < screen.worst() || !screen.full()) screen.offer(approx, p);
        }
        const Scalar cutoff = screen.worst() + Scalar(2) * tol * (qn + max_norm);

        exact.clear();
        const Scalar* qrow = cloud.row(q).data();
        for (Index p = 0; p < n; ++p) {
          if (p == q) continue;
          if (qn + norms(p) - Scalar(2) * g[p] > cutoff) continue;
          exact.offer(squared_distance(qrow, cloud.row(p).data(), dim), p);
        }
        detail::store_row(table, start + b, exact.items());
      }
    }
  }
  return table;
}

/// Kd-trees stop paying off once the ambient dimension grows; measured
/// crossover on Gaussian clouds (n = 2500 to 10000, k = 8) is near D = 8.
inline constexpr Index kKdTreeMaxDim = 8;

/// Exact k-nearest-neighbor table for the given query rows, distances measured
/// against the full cloud.
template <typename Scalar>
NeighborTableT<Scalar> build_neighbor_table(const PointCloudT<Scalar>& cloud, int kmax,
                                            std::span<const Index> query,
                                            KnnAlgorithm algo = KnnAlgorithm::Auto) {
  if (algo == KnnAlgorithm::Auto)
    algo = cloud.cols() <= kKdTreeMaxDim ? KnnAlgorithm::KdTree : KnnAlgorithm::Brute;
  return algo == KnnAlgorithm::KdTree ? knn_kdtree(cloud, kmax, query)
                                      : knn_brute(cloud, kmax, query);
}

/// Exact k-nearest-neighbor table for every point of the cloud.
template <typename Scalar>
NeighborTableT<Scalar> build_neighbor_table(const PointCloudT<Scalar>& cloud, int kmax,
                                            KnnAlgorithm algo = KnnAlgorithm::Auto) {
  std::vector<Index> all(static_cast<std::size_t>(cloud.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  return build_neighbor_table(cloud, kmax, std::span<const Index>(all), algo);
}

}  // namespace l2n2
