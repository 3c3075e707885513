#include "dcot/tensor.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dcot/error.hpp"

namespace dcot {

namespace {

Index checked_product(const std::vector<Index>& dims) {
  Index total = 1;
  for (Index d : dims) {
    if (d == 0) throw DimensionError("shape: every mode size must be positive");
    if (total > std::numeric_limits<Index>::max() / d) throw DimensionError("shape: element count overflows");
    total *= d;
  }
  return total;
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape().to_string() + " vs " +
                         b.shape().to_string());
  }
}

void require_same_dims(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": matrix dimension mismatch");
  }
}

// Sizes of the modes before and after n, for the (left, I_n, right) view.
std::pair<Index, Index> split_around(const Shape& s, Index n) {
  Index left = 1;
  Index right = 1;
  for (Index k = 0; k < n; ++k) left *= s.dim(k);
  for (Index k = n + 1; k < s.order(); ++k) right *= s.dim(k);
  return {left, right};
}

}  // namespace

// ---------------------------------------------------------------- Shape

Shape::Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("shape: order must be at least 1");
  size_ = checked_product(dims_);
}

Index Shape::linear_index(std::span<const Index> idx) const {
  if (idx.size() != dims_.size()) throw DimensionError("index has wrong number of modes");
  Index linear = 0;
  Index stride = 1;
  for (Index k = 0; k < dims_.size(); ++k) {
    if (idx[k] >= dims_[k]) throw DimensionError("index out of range in mode " + std::to_string(k));
    linear += idx[k] * stride;
    stride *= dims_[k];
  }
  return linear;
}

std::vector<Index> Shape::multi_index(Index linear) const {
  std::vector<Index> out(dims_.size());
  multi_index(linear, out);
  return out;
}

void Shape::multi_index(Index linear, std::span<Index> out) const {
  if (linear >= size_) throw DimensionError("linear index out of range");
  for (Index k = 0; k < dims_.size(); ++k) {
    out[k] = linear % dims_[k];
    linear /= dims_[k];
  }
}

Shape Shape::with_dim(Index n, Index value) const {
  auto d = dims_;
  d.at(n) = value;
  return Shape(std::move(d));
}

std::string Shape::to_string() const {
  std::ostringstream os;
  os << '(';
  for (Index k = 0; k < dims_.size(); ++k) os << (k ? "," : "") << dims_[k];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- DenseMatrix

DenseMatrix::DenseMatrix(Index rows, Index cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw DimensionError("matrix: data length does not match rows*cols");
}

DenseMatrix DenseMatrix::identity(Index n) {
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = rows.size();
  const Index c = r ? rows.begin()->size() : 0;
  DenseMatrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("from_rows: ragged rows");
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (Index j = 0; j < cols_; ++j)
    for (Index i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  require_same_dims(*this, other, "matrix +");
  for (Index k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  require_same_dims(*this, other, "matrix -");
  for (Index k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j)
    for (Index k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      for (Index i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
  DenseMatrix c(a.cols(), b.cols());
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = 0; i < a.cols(); ++i) {
      double s = 0.0;
      for (Index k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
  DenseMatrix c(a.rows(), b.rows());
  for (Index k = 0; k < a.cols(); ++k)
    for (Index j = 0; j < b.rows(); ++j) {
      const double bjk = b(j, k);
      for (Index i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bjk;
    }
  return c;
}

// ---------------------------------------------------------------- DenseTensor

DenseTensor::DenseTensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_.size(), fill) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.size()) throw DimensionError("tensor: data length does not match shape");
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  require_same_shape(*this, other, "tensor +");
  for (Index k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  require_same_shape(*this, other, "tensor -");
  for (Index k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseTensor& DenseTensor::axpy(double s, const DenseTensor& other) {
  require_same_shape(*this, other, "axpy");
  for (Index k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
  return *this;
}

bool DenseTensor::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

// ---------------------------------------------------------------- unfoldings

DenseMatrix matricize(const DenseTensor& t, Index n) {
  const Shape& s = t.shape();
  if (n >= s.order()) throw DimensionError("matricize: mode out of range");
  const auto [left, right] = split_around(s, n);
  const Index in = s.dim(n);
  // With first-mode-fastest storage, column j = l + left * r for the
  // (left, I_n, right) view, which is exactly the documented column map.
  DenseMatrix m(in, left * right);
  const auto src = t.data();
  for (Index r = 0; r < right; ++r)
    for (Index i = 0; i < in; ++i)
      for (Index l = 0; l < left; ++l) m(i, l + left * r) = src[l + left * (i + in * r)];
  return m;
}

DenseTensor fold(const DenseMatrix& m, Index n, const Shape& target) {
  if (n >= target.order()) throw DimensionError("fold: mode out of range");
  const auto [left, right] = split_around(target, n);
  const Index in = target.dim(n);
  if (m.rows() != in || m.cols() != left * right) throw DimensionError("fold: matrix does not match target shape");
  DenseTensor t(target);
  auto dst = t.data();
  for (Index r = 0; r < right; ++r)
    for (Index i = 0; i < in; ++i)
      for (Index l = 0; l < left; ++l) dst[l + left * (i + in * r)] = m(i, l + left * r);
  return t;
}

DenseTensor n_mode_product(const DenseTensor& t, const DenseMatrix& u, Index n) {
  const Shape& s = t.shape();
  if (n >= s.order()) throw DimensionError("n_mode_product: mode out of range");
  const Index in = s.dim(n);
  if (u.cols() != in) throw DimensionError("n_mode_product: factor columns must equal mode size");
  const auto [left, right] = split_around(s, n);
  const Index jn = u.rows();
  DenseTensor out(s.with_dim(n, jn));
  auto dst = out.data();
  const auto src = t.data();
  for (Index r = 0; r < right; ++r)
    for (Index i = 0; i < in; ++i) {
      const double* col = src.data() + left * (i + in * r);
      for (Index j = 0; j < jn; ++j) {
        const double uji = u(j, i);
        if (uji == 0.0) continue;
        double* o = dst.data() + left * (j + jn * r);
        for (Index l = 0; l < left; ++l) o[l] += uji * col[l];
      }
    }
  return out;
}

DenseTensor n_mode_product_transposed(const DenseTensor& t, const DenseMatrix& u, Index n) {
  const Shape& s = t.shape();
  if (n >= s.order()) throw DimensionError("n_mode_product_transposed: mode out of range");
  const Index in = s.dim(n);
  if (u.rows() != in) throw DimensionError("n_mode_product_transposed: factor rows must equal mode size");
  const auto [left, right] = split_around(s, n);
  const Index jn = u.cols();
  DenseTensor out(s.with_dim(n, jn));
  auto dst = out.data();
  const auto src = t.data();
  for (Index r = 0; r < right; ++r)
    for (Index i = 0; i < in; ++i) {
      const double* col = src.data() + left * (i + in * r);
      for (Index j = 0; j < jn; ++j) {
        const double uij = u(i, j);
        if (uij == 0.0) continue;
        double* o = dst.data() + left * (j + jn * r);
        for (Index l = 0; l < left; ++l) o[l] += uij * col[l];
      }
    }
  return out;
}

DenseTensor multilinear_product(const DenseTensor& core, std::span<const DenseMatrix> factors) {
  if (factors.size() != core.order()) throw DimensionError("multilinear_product: need one factor per mode");
  DenseTensor out = core;
  for (Index n = 0; n < factors.size(); ++n) out = n_mode_product(out, factors[n], n);
  return out;
}

DenseTensor multilinear_product_transposed(const DenseTensor& t, std::span<const DenseMatrix> factors) {
  if (factors.size() != t.order()) throw DimensionError("multilinear_product_transposed: need one factor per mode");
  DenseTensor out = t;
  for (Index n = 0; n < factors.size(); ++n) out = n_mode_product_transposed(out, factors[n], n);
  return out;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  if (a.rows() && rows / a.rows() != b.rows()) throw DimensionError("kron: size overflow");
  if (a.cols() && cols / a.cols() != b.cols()) throw DimensionError("kron: size overflow");
  if (rows && cols > std::numeric_limits<Index>::max() / rows) throw DimensionError("kron: size overflow");
  DenseMatrix c(rows, cols);
  for (Index i2 = 0; i2 < a.cols(); ++i2)
    for (Index j2 = 0; j2 < b.cols(); ++j2)
      for (Index i1 = 0; i1 < a.rows(); ++i1) {
        const double aij = a(i1, i2);
        for (Index j1 = 0; j1 < b.rows(); ++j1) c(i1 * b.rows() + j1, i2 * b.cols() + j2) = aij * b(j1, j2);
      }
  return c;
}

double frob_inner(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "frob_inner");
  double s = 0.0;
  for (Index k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double frob_norm(const DenseTensor& t) { return std::sqrt(frob_inner(t, t)); }

double frob_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double frob_distance(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "frob_distance");
  double s = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double frob_distance(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_dims(a, b, "frob_distance");
  double s = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    const double d = a.data()[k] - b.data()[k];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace dcot
