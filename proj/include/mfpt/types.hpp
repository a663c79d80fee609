#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mfpt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |v| = sum of entries, the l1 norm restricted to the positive cone.
inline double vec_norm(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < 0.0) throw DomainError("vec_norm: negative entry");
  return v.sum();
}

// Operator norm induced by the cone l1 norm: max column sum.
inline double op_norm(const Mat& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double cs = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, j) < 0.0) throw DomainError("op_norm: negative entry");
      cs += m(i, j);
    }
    best = std::max(best, cs);
  }
  return best;
}

// iota(M) = inf over simplex directions of |Mx| = min column sum.
inline double iota(const Mat& m) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double cs = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, j) < 0.0) throw DomainError("iota: negative entry");
      cs += m(i, j);
    }
    best = std::min(best, cs);
  }
  return best;
}

// A point of the positive unit simplex: entries >= 0 summing to 1.
inline bool is_direction(const Vec& x, double tol = 1e-9) {
  if (x.size() == 0) return false;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < -tol) return false;
    s += x[i];
  }
  return std::abs(s - 1.0) <= tol;
}

inline Vec normalize_direction(const Vec& v) {
  double n = v.sum();
  if (n <= 0.0) throw DomainError("normalize_direction: zero or negative mass");
  return v / n;
}

// Projective action M.x = Mx/|Mx|.
inline Vec project(const Mat& m, const Vec& x) {
  Vec v = m * x;
  double n = v.sum();
  if (n <= 0.0) throw DomainError("project: degenerate action, Mx = 0");
  return v / n;
}

// Every row and every column has a strictly positive entry.
inline bool is_allowable(const Mat& m) {
  const Eigen::Index d = m.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    bool row = false, col = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (m(i, j) > 0.0) row = true;
      if (m(j, i) > 0.0) col = true;
    }
    if (!row || !col) return false;
  }
  return true;
}

inline bool is_strictly_positive(const Mat& m) {
  return (m.array() > 0.0).all();
}

// Dominant eigenvalue of a nonnegative matrix (Perron root), by power iteration.
double dominant_eigenvalue(const Mat& m, int max_iter = 2000, double tol = 1e-13);

}  // namespace mfpt
