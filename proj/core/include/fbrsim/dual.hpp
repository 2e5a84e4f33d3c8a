#pragma once

// Forward-mode automatic differentiation with a fixed number of directions.
//
// Dual<T, N> carries a value and N directional derivatives. T may itself be a
// Dual, which gives exact second derivatives by nesting. All property and
// residual code in the library is written against a generic scalar type so the
// same source produces values (double), gradients and Jacobians.

#include <array>
#include <cmath>
#include <type_traits>

namespace fbrsim {

template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;

  template <class U>
    requires(std::is_convertible_v<U, T> && !std::is_same_v<std::remove_cvref_t<U>, Dual>)
  Dual(const U& x) : v(x) {}  // NOLINT: implicit promotion of constants

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1.0) / o.v;
    v *= inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - v * o.d[i]) * inv;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    return *this;
  }
  Dual& operator/=(double s) { return *this *= (1.0 / s); }
  Dual& operator+=(double s) {
    v += s;
    return *this;
  }
  Dual& operator-=(double s) {
    v -= s;
    return *this;
  }
};

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) {
  return value_of(x.v);
}

// True when the value and every derivative component are exactly zero.
inline bool is_zero(double x) { return x == 0.0; }
template <class T, int N>
bool is_zero(const Dual<T, N>& x) {
  if (!is_zero(x.v)) return false;
  for (const auto& di : x.d) {
    if (!is_zero(di)) return false;
  }
  return true;
}

// Seeds the i-th direction of a first-level dual.
template <class T, int N>
Dual<T, N> make_variable(const T& value, int direction) {
  Dual<T, N> r(value);
  r.d[direction] = T(1.0);
  return r;
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
  return a += b;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
  return a -= b;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) {
  return a *= b;
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) {
  return a /= b;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double s) {
  return a += s;
}
template <class T, int N>
Dual<T, N> operator+(double s, Dual<T, N> a) {
  return a += s;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double s) {
  return a -= s;
}
template <class T, int N>
Dual<T, N> operator-(double s, const Dual<T, N>& a) {
  Dual<T, N> r = -a;
  return r += s;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double s) {
  return a *= s;
}
template <class T, int N>
Dual<T, N> operator*(double s, Dual<T, N> a) {
  return a *= s;
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double s) {
  return a /= s;
}
template <class T, int N>
Dual<T, N> operator/(double s, const Dual<T, N>& a) {
  Dual<T, N> r{T(s)};
  return r /= a;
}

#define FBRSIM_DUAL_COMPARE(op)                                   \
  template <class T, int N>                                       \
  bool operator op(const Dual<T, N>& a, const Dual<T, N>& b) {    \
    return value_of(a) op value_of(b);                            \
  }                                                               \
  template <class T, int N>                                       \
  bool operator op(const Dual<T, N>& a, double b) {               \
    return value_of(a) op b;                                      \
  }                                                               \
  template <class T, int N>                                       \
  bool operator op(double a, const Dual<T, N>& b) {               \
    return a op value_of(b);                                      \
  }
FBRSIM_DUAL_COMPARE(<)
FBRSIM_DUAL_COMPARE(>)
FBRSIM_DUAL_COMPARE(<=)
FBRSIM_DUAL_COMPARE(>=)
#undef FBRSIM_DUAL_COMPARE

// Chain rule helper: f(a) with f'(a) = df.
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& f, const T& df) {
  Dual<T, N> r;
  r.v = f;
  for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
  return r;
}

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  // sqrt is not differentiable at zero; report a zero slope there.
  if (value_of(s) == 0.0) return Dual<T, N>(s);
  return chain(a, s, T(0.5) / s);
}

template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
  using std::exp;
  const T e = exp(a.v);
  return chain(a, e, e);
}

template <class T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
  using std::log;
  return chain(a, T(log(a.v)), T(1.0) / a.v);
}

template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& a, double p) {
  using std::pow;
  const T f = pow(a.v, p);
  return chain(a, f, T(p) * pow(a.v, p - 1.0));
}

template <class T, int N>
Dual<T, N> abs(const Dual<T, N>& a) {
  return value_of(a) < 0.0 ? -a : a;
}

// Value-based max/min: the derivative follows the selected branch.
template <class S>
S max_value(const S& a, const S& b) {
  return value_of(a) >= value_of(b) ? a : b;
}
template <class S>
  requires is_dual<S>::value
S max_value(const S& a, double b) {
  return value_of(a) >= b ? a : S(b);
}

}  // namespace fbrsim
