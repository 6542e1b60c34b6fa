#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "otp/common.hpp"

namespace otp::qsim {

// Dense square complex matrix, row-major. Dimensions here stay <= 128, so a
// plain vector and O(d^3) algorithms are ample.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(std::size_t dim) : dim_(dim), m_(dim * dim) {}

  static CMatrix identity(std::size_t dim) {
    CMatrix out(dim);
    for (std::size_t i = 0; i < dim; ++i) out(i, i) = 1.0;
    return out;
  }

  std::size_t dim() const { return dim_; }
  std::complex<double>& operator()(std::size_t r, std::size_t c) { return m_[r * dim_ + c]; }
  const std::complex<double>& operator()(std::size_t r, std::size_t c) const {
    return m_[r * dim_ + c];
  }

  CMatrix& operator+=(const CMatrix& o) {
    check_dim(o);
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += o.m_[i];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    check_dim(o);
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] -= o.m_[i];
    return *this;
  }
  CMatrix& operator*=(std::complex<double> s) {
    for (auto& v : m_) v *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, std::complex<double> s) { return a *= s; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    a.check_dim(b);
    const std::size_t d = a.dim_;
    CMatrix out(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        const std::complex<double> aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  std::complex<double> trace() const {
    std::complex<double> t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : m_) m = std::max(m, std::abs(v));
    return m;
  }

  double hermiticity_defect() const {
    double m = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = r; c < dim_; ++c)
        m = std::max(m, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    return m;
  }

  // Kronecker product.
  friend CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const std::size_t da = a.dim(), db = b.dim();
    CMatrix out(da * db);
    for (std::size_t ra = 0; ra < da; ++ra)
      for (std::size_t ca = 0; ca < da; ++ca) {
        const std::complex<double> v = a(ra, ca);
        if (v == 0.0) continue;
        for (std::size_t rb = 0; rb < db; ++rb)
          for (std::size_t cb = 0; cb < db; ++cb)
            out(ra * db + rb, ca * db + cb) = v * b(rb, cb);
      }
    return out;
  }

 private:
  void check_dim(const CMatrix& o) const {
    if (dim_ != o.dim_) fail(Errc::invalid_argument, "matrix dimension mismatch");
  }
  std::size_t dim_ = 0;
  std::vector<std::complex<double>> m_;
};

// Positive semidefiniteness of a Hermitian matrix via Cholesky on A + tol*I.
// Sound for the invariant checks here: eigenvalues >= -tol pass.
inline bool is_psd(const CMatrix& a, double tol = 1e-9) {
  const std::size_t d = a.dim();
  CMatrix l(d);
  CMatrix work = a;
  for (std::size_t i = 0; i < d; ++i) work(i, i) += tol;
  for (std::size_t j = 0; j < d; ++j) {
    std::complex<double> sum = work(j, j);
    for (std::size_t k = 0; k < j; ++k) sum -= l(j, k) * std::conj(l(j, k));
    const double diag = std::real(sum);
    if (diag <= 0.0) return false;
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < d; ++i) {
      std::complex<double> s = work(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

// Eigenvalues of a real symmetric matrix by cyclic Jacobi. Input is row-major
// and destroyed.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t d) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * d + c]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += at(p, q) * at(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> eig(d);
  for (std::size_t i = 0; i < d; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Eigenvalues of a Hermitian complex matrix H = A + iB through the real
// symmetric embedding [[A, -B], [B, A]], whose spectrum is that of H with
// every value doubled.
inline std::vector<double> hermitian_eigenvalues(const CMatrix& h) {
  const std::size_t d = h.dim();
  std::vector<double> big(4 * d * d, 0.0);
  const std::size_t n = 2 * d;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double re = std::real(h(r, c)), im = std::imag(h(r, c));
      big[r * n + c] = re;
      big[(r + d) * n + (c + d)] = re;
      big[r * n + (c + d)] = -im;
      big[(r + d) * n + c] = im;
    }
  std::vector<double> doubled = jacobi_eigenvalues(std::move(big), n);
  std::vector<double> eig(d);
  for (std::size_t i = 0; i < d; ++i) eig[i] = doubled[2 * i];  // sorted pairs
  return eig;
}

// Trace distance (1/2)||A - B||_1 between Hermitian matrices.
inline double trace_distance(const CMatrix& a, const CMatrix& b) {
  CMatrix diff = a;
  diff -= b;
  double sum = 0.0;
  for (double ev : hermitian_eigenvalues(diff)) sum += std::abs(ev);
  return 0.5 * sum;
}

}  // namespace otp::qsim
