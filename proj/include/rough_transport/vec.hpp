#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <ostream>

namespace rough_transport {

/// Fixed-capacity point/vector in R^d, d <= 3.
class Vec {
 public:
  static constexpr int kMaxDim = 3;

  Vec() = default;
  explicit Vec(int dim) : dim_(dim) { assert(dim >= 0 && dim <= kMaxDim); }
  Vec(std::initializer_list<double> values) : dim_(static_cast<int>(values.size())) {
    assert(dim_ <= kMaxDim);
    int i = 0;
    for (double v : values) c_[i++] = v;
  }

  static Vec filled(int dim, double value) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v.c_[i] = value;
    return v;
  }

  int dim() const { return dim_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  friend std::ostream& operator<<(std::ostream& os, const Vec& v) {
    os << '(';
    for (int i = 0; i < v.dim_; ++i) os << (i ? ", " : "") << v.c_[i];
    return os << ')';
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

}  // namespace rough_transport
