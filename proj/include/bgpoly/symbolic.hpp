#pragma once

// Sparse commutative polynomials with real coefficients over a fixed set of
// named variables, plus derivations (linear maps obeying Leibniz) given by
// their action on each variable. Enough to push the psi-ladder, the S operator
// and the coupled derivative through h_n, d~^k L and p_n exactly.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "bgpoly/errors.hpp"

namespace bgpoly::sym {

// Variable layout.
inline constexpr int kPsiSlots = 12;  // psi_0 .. psi_11
inline constexpr int kTSlots = 10;    // T_1 .. T_10
enum Var : int {
  kA = 0,
  kPsi0 = 1,
  kLogX = kPsi0 + kPsiSlots,
  kZ,
  kT1,
  kR = kT1 + kTSlots,
  kU,
  kNumVars
};

inline int psi_var(int j) {
  if (j < 0 || j >= kPsiSlots) throw CapabilityError("symbolic: psi_" + std::to_string(j) + " out of range");
  return kPsi0 + j;
}

inline int t_var(int n) {
  if (n < 1 || n > kTSlots) throw CapabilityError("symbolic: T_" + std::to_string(n) + " out of range");
  return kT1 + n - 1;
}

inline std::string var_name(int v) {
  if (v == kA) return "a";
  if (v >= kPsi0 && v < kPsi0 + kPsiSlots) return "psi" + std::to_string(v - kPsi0);
  if (v == kLogX) return "lx";
  if (v == kZ) return "z";
  if (v >= kT1 && v < kT1 + kTSlots) return "T" + std::to_string(v - kT1 + 1);
  if (v == kR) return "r";
  if (v == kU) return "u";
  return "?";
}

using Monomial = std::array<std::uint8_t, kNumVars>;

class Poly {
 public:
  Poly() = default;
  explicit Poly(double c) {
    if (c != 0.0) terms_[Monomial{}] = c;
  }

  static Poly var(int v, int power = 1) {
    Poly p;
    Monomial m{};
    m[v] = static_cast<std::uint8_t>(power);
    p.terms_[m] = 1.0;
    return p;
  }

  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Monomial& m, double c) {
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Poly& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Poly operator+(Poly x, const Poly& y) { return x += y; }
  friend Poly operator-(Poly x, const Poly& y) { return x -= y; }
  friend Poly operator*(Poly x, double s) { return x *= s; }
  friend Poly operator*(double s, Poly x) { return x *= s; }

  friend Poly operator*(const Poly& x, const Poly& y) {
    Poly out;
    for (const auto& [mx, cx] : x.terms_) {
      for (const auto& [my, cy] : y.terms_) {
        Monomial m;
        for (int i = 0; i < kNumVars; ++i) {
          const int e = mx[i] + my[i];
          if (e > 255) throw CapabilityError("symbolic: exponent overflow");
          m[i] = static_cast<std::uint8_t>(e);
        }
        out.add_term(m, cx * cy);
      }
    }
    return out;
  }

  /// Evaluate with values[v] for every variable that appears.
  double eval(const std::array<double, kNumVars>& values) const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c;
      for (int i = 0; i < kNumVars; ++i)
        if (m[i]) t *= std::pow(values[i], m[i]);
      s += t;
    }
    return s;
  }

  int degree_in(int v) const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max<int>(d, m[v]);
    return d;
  }

  bool uses(int v) const {
    for (const auto& [m, c] : terms_)
      if (m[v]) return true;
    return false;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << "-";
      first = false;
      const double ac = std::abs(c);
      bool any = false;
      for (int i = 0; i < kNumVars; ++i) any = any || m[i];
      if (ac != 1.0 || !any) os << ac;
      for (int i = 0; i < kNumVars; ++i) {
        if (!m[i]) continue;
        os << (ac != 1.0 || i != 0 ? "*" : "") << var_name(i);
        if (m[i] > 1) os << "^" << int(m[i]);
      }
    }
    std::string s = os.str();
    // tidy a leading "*" from the unit-coefficient path
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '*' && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '-')) continue;
      out += s[i];
    }
    return out;
  }

 private:
  std::map<Monomial, double> terms_;
};

/// A derivation D, determined by D(v) for each variable; D(constant) = 0.
class Derivation {
 public:
  explicit Derivation(std::function<Poly(int)> on_var) : on_var_(std::move(on_var)) {
    for (int v = 0; v < kNumVars; ++v) cache_[v] = on_var_(v);
  }

  Poly operator()(const Poly& p) const {
    Poly out;
    for (const auto& [m, c] : p.terms()) {
      for (int v = 0; v < kNumVars; ++v) {
        if (!m[v] || cache_[v].is_zero()) continue;
        Monomial rest = m;
        rest[v] = static_cast<std::uint8_t>(rest[v] - 1);
        Poly mono;
        mono.add_term(rest, c * m[v]);
        out += mono * cache_[v];
      }
    }
    return out;
  }

 private:
  std::function<Poly(int)> on_var_;
  std::array<Poly, kNumVars> cache_;
};

}  // namespace bgpoly::sym
