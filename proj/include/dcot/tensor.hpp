#pragma once

// Dense N-way tensor algebra.
//
// Storage is first-mode-fastest: entry (i_1, ..., i_N) (0-based) lives at
//   i_1 + I_1 * (i_2 + I_2 * (i_3 + ...)),
// which is vec(X). Matrices are the N = 2 case of the same rule, i.e.
// column-major.
//
// Mode-n matricization maps entry (i_1, ..., i_N) to row i_n and column
//   j = sum_{k != n} i_k * prod_{m < k, m != n} I_m,
// so the remaining modes keep their relative order with the lowest mode
// fastest. Under this convention
//   matricize(X x_n U, n) = U * matricize(X, n)
//   matricize(S x_1 U1 ... x_N UN, n) = Un * S_(n) * (UN (x) ... (x) U1 without Un)^T.
//
// Modes are 0-based throughout the C++ API.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dcot {

using Index = std::size_t;

class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<Index> dims);
  Shape(std::initializer_list<Index> dims) : Shape(std::vector<Index>(dims)) {}

  Index order() const noexcept { return dims_.size(); }
  Index dim(Index n) const { return dims_.at(n); }
  const std::vector<Index>& dims() const noexcept { return dims_; }
  Index size() const noexcept { return size_; }

  /// Flat offset of a multi-index; throws on out-of-range coordinates.
  Index linear_index(std::span<const Index> idx) const;
  /// Inverse of linear_index.
  std::vector<Index> multi_index(Index linear) const;
  /// Writes the multi-index of `linear` into `out` (no allocation).
  void multi_index(Index linear, std::span<Index> out) const;

  /// Same dims with mode n replaced.
  Shape with_dim(Index n, Index value) const;

  std::string to_string() const;

  friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

 private:
  std::vector<Index> dims_;
  Index size_ = 0;
};

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, double fill = 0.0);
  DenseMatrix(Index rows, Index cols, std::vector<double> data);

  static DenseMatrix identity(Index n);
  /// Row-major nested initializer, convenient for literals in tests.
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }

  double& operator()(Index i, Index j) { return data_[i + rows_ * j]; }
  double operator()(Index i, Index j) const { return data_[i + rows_ * j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  DenseMatrix transpose() const;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b without forming the transpose.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T without forming the transpose.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape, double fill = 0.0);
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  Index order() const noexcept { return shape_.order(); }
  Index size() const noexcept { return data_.size(); }

  double& operator[](Index linear) { return data_[linear]; }
  double operator[](Index linear) const { return data_[linear]; }
  double& at(std::span<const Index> idx) { return data_[shape_.linear_index(idx)]; }
  double at(std::span<const Index> idx) const { return data_[shape_.linear_index(idx)]; }
  double& at(std::initializer_list<Index> idx) { return at(std::span<const Index>(idx.begin(), idx.size())); }
  double at(std::initializer_list<Index> idx) const {
    return at(std::span<const Index>(idx.begin(), idx.size()));
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);
  DenseTensor& operator*=(double s);
  /// this += s * other
  DenseTensor& axpy(double s, const DenseTensor& other);

  bool all_finite() const noexcept;

  friend bool operator==(const DenseTensor& a, const DenseTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double s, DenseTensor a);

DenseMatrix matricize(const DenseTensor& t, Index n);
DenseTensor fold(const DenseMatrix& m, Index n, const Shape& target);

/// t x_n u: mode n of size I_n becomes u.rows().
DenseTensor n_mode_product(const DenseTensor& t, const DenseMatrix& u, Index n);
/// t x_n u^T without forming the transpose: mode n of size u.rows() becomes u.cols().
DenseTensor n_mode_product_transposed(const DenseTensor& t, const DenseMatrix& u, Index n);

/// core x_1 U1 x_2 U2 ... x_N UN.
DenseTensor multilinear_product(const DenseTensor& core, std::span<const DenseMatrix> factors);
/// t x_1 U1^T ... x_N UN^T (the adjoint of multilinear_product).
DenseTensor multilinear_product_transposed(const DenseTensor& t, std::span<const DenseMatrix> factors);

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

double frob_inner(const DenseTensor& a, const DenseTensor& b);
double frob_norm(const DenseTensor& t);
double frob_norm(const DenseMatrix& m);
double frob_distance(const DenseTensor& a, const DenseTensor& b);
double frob_distance(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace dcot
