#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ergobound {

/// A monomial x_1^{e_1} ... x_d^{e_d}, stored as its exponent vector.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);

  /// The constant monomial 1 in `dim` variables.
  static Monomial One(int dim);
  /// x_index^power in `dim` variables.
  static Monomial Variable(int dim, int index, int power = 1);

  int dim() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exponents_[i]; }
  std::span<const int> exponents() const { return exponents_; }

  Monomial operator*(const Monomial& other) const;
  double Evaluate(std::span<const double> x) const;

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.exponents_ == b.exponents_;
  }

  /// Human-readable form using the given names, e.g. "x^2*y".
  std::string ToString(std::span<const std::string> names = {}) const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Graded lexicographic order: lower total degree first; within a degree,
/// larger exponent of the earlier variable first (so 1, x, y, z, x^2, xy, ...).
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// All monomials in `dim` variables of total degree <= max_degree, in graded
/// lexicographic order. Length is C(dim + max_degree, dim).
std::vector<Monomial> MonomialBasis(int dim, int max_degree);

/// Monomials with min_degree <= total degree <= max_degree, graded lex order.
std::vector<Monomial> MonomialRange(int dim, int min_degree, int max_degree);

/// Sparse multivariate polynomial with double coefficients.
///
/// Terms are kept in graded lexicographic order, so iteration (and therefore
/// evaluation and serialization) is deterministic. Terms whose magnitude is
/// <= prune_threshold are dropped after every operation; the default threshold
/// of 0 removes exact zeros only.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(int dim, double prune_threshold = 0.0);

  static Polynomial Constant(int dim, double value);
  static Polynomial Variable(int dim, int index);
  static Polynomial FromTerm(const Monomial& m, double coefficient);

  int dim() const { return dim_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  std::size_t num_terms() const { return terms_.size(); }
  const TermMap& terms() const { return terms_; }
  double prune_threshold() const { return prune_threshold_; }

  double coefficient(const Monomial& m) const;
  double constant_term() const;
  /// Adds `value` to the coefficient of `m`, pruning the term if it vanishes.
  void AddTerm(const Monomial& m, double value);

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double scalar) const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);

  /// Exact term-sum evaluation in graded lexicographic term order.
  double Evaluate(std::span<const double> x) const;

  Polynomial Derivative(int index) const;
  std::vector<Polynomial> Gradient() const;

  /// Largest absolute coefficient (0 for the zero polynomial).
  double MaxAbsCoefficient() const;

  /// Re-applies a prune threshold, dropping small terms.
  Polynomial Pruned(double threshold) const;

  /// Text form: header "dim d", then one "coefficient e1 ... ed" line per
  /// term with 17 significant digits. Round-trips bit-exactly.
  std::string ToText() const;
  static Polynomial FromText(std::string_view text);

  std::string ToString(std::span<const std::string> names = {}) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

 private:
  void CheckSameDim(const Polynomial& other) const;

  int dim_ = 0;
  double prune_threshold_ = 0.0;
  TermMap terms_;
};

inline Polynomial operator*(double scalar, const Polynomial& p) {
  return p * scalar;
}

/// Gradient of p: d polynomials, the i-th being dp/dx_i.
std::vector<Polynomial> Gradient(const Polynomial& p);

/// p composed with x_i -> scales[i] * x_i + shifts[i], fully expanded.
/// Throws std::invalid_argument on a nonpositive scale or size mismatch.
Polynomial AffineRescale(const Polynomial& p, std::span<const double> scales,
                         std::span<const double> shifts);

/// Parses an arithmetic expression in the named variables: numbers,
/// identifiers, + - * / (by constants only), ^ with nonnegative integer
/// exponents and parentheses. Identifiers not in `variables` are looked up in
/// `constants`. Throws std::invalid_argument on malformed input.
Polynomial ParsePolynomial(std::string_view expression,
                           std::span<const std::string> variables,
                           const std::map<std::string, double>& constants = {});

/// 64-bit FNV-1a hash of a byte string; used to tag derived artifacts.
std::uint64_t Fnv1aHash(std::string_view bytes);

}  // namespace ergobound
