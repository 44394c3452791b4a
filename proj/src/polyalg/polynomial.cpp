#include "ergobound/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ergobound {

namespace {

std::string FormatDouble17(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string DefaultName(int i, int dim) {
  static const char* kXyz[] = {"x", "y", "z"};
  if (dim <= 3) return kXyz[i];
  return "x" + std::to_string(i + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::One(int dim) { return Monomial(std::vector<int>(dim, 0)); }

Monomial Monomial::Variable(int dim, int index, int power) {
  if (index < 0 || index >= dim) {
    throw std::out_of_range("Monomial::Variable: index out of range");
  }
  std::vector<int> e(dim, 0);
  e[index] = power;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (dim() != other.dim()) {
    throw std::invalid_argument("Monomial product: dimension mismatch");
  }
  std::vector<int> e(exponents_);
  for (int i = 0; i < dim(); ++i) e[i] += other.exponents_[i];
  return Monomial(std::move(e));
}

double Monomial::Evaluate(std::span<const double> x) const {
  double value = 1.0;
  for (int i = 0; i < dim(); ++i) {
    for (int k = 0; k < exponents_[i]; ++k) value *= x[i];
  }
  return value;
}

std::string Monomial::ToString(std::span<const std::string> names) const {
  std::string out;
  for (int i = 0; i < dim(); ++i) {
    if (exponents_[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += names.size() == static_cast<std::size_t>(dim()) ? names[i]
                                                             : DefaultName(i, dim());
    if (exponents_[i] > 1) out += "^" + std::to_string(exponents_[i]);
  }
  return out.empty() ? "1" : out;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const auto ea = a.exponents();
  const auto eb = b.exponents();
  for (std::size_t i = 0; i < ea.size() && i < eb.size(); ++i) {
    if (ea[i] != eb[i]) return ea[i] > eb[i];
  }
  return ea.size() < eb.size();
}

namespace {

// Appends every exponent vector of exactly `degree` in graded lex order.
void AppendDegree(int dim, int degree, std::vector<Monomial>& out) {
  std::vector<int> e(dim, 0);
  // Recursive fill: first variable takes the largest share first.
  auto fill = [&](auto&& self, int var, int remaining) -> void {
    if (var == dim - 1) {
      e[var] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[var] = k;
      self(self, var + 1, remaining - k);
    }
    e[var] = 0;
  };
  fill(fill, 0, degree);
}

}  // namespace

std::vector<Monomial> MonomialRange(int dim, int min_degree, int max_degree) {
  if (dim < 1) throw std::invalid_argument("MonomialRange: dim must be >= 1");
  std::vector<Monomial> out;
  for (int deg = std::max(0, min_degree); deg <= max_degree; ++deg) {
    AppendDegree(dim, deg, out);
  }
  return out;
}

std::vector<Monomial> MonomialBasis(int dim, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("MonomialBasis: negative degree");
  return MonomialRange(dim, 0, max_degree);
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(int dim, double prune_threshold)
    : dim_(dim), prune_threshold_(prune_threshold) {
  if (dim < 0) throw std::invalid_argument("Polynomial: negative dimension");
  if (!(prune_threshold >= 0.0)) {
    throw std::invalid_argument("Polynomial: prune threshold must be >= 0");
  }
}

Polynomial Polynomial::Constant(int dim, double value) {
  Polynomial p(dim);
  p.AddTerm(Monomial::One(dim), value);
  return p;
}

Polynomial Polynomial::Variable(int dim, int index) {
  Polynomial p(dim);
  p.AddTerm(Monomial::Variable(dim, index), 1.0);
  return p;
}

Polynomial Polynomial::FromTerm(const Monomial& m, double coefficient) {
  Polynomial p(m.dim());
  p.AddTerm(m, coefficient);
  return p;
}

int Polynomial::degree() const {
  // Terms are graded, so the last one has the largest degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const {
  if (terms_.empty()) return 0.0;
  const auto& [m, c] = *terms_.begin();
  return m.degree() == 0 ? c : 0.0;
}

void Polynomial::AddTerm(const Monomial& m, double value) {
  if (m.dim() != dim_) throw std::invalid_argument("AddTerm: dimension mismatch");
  auto [it, inserted] = terms_.try_emplace(m, 0.0);
  it->second += value;
  if (std::abs(it->second) <= prune_threshold_) terms_.erase(it);
}

void Polynomial::CheckSameDim(const Polynomial& other) const {
  if (dim_ != other.dim_) {
    throw std::invalid_argument("Polynomial: dimension mismatch (" +
                                std::to_string(dim_) + " vs " +
                                std::to_string(other.dim_) + ")");
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  CheckSameDim(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  CheckSameDim(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial out(*this);
  out += other;
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  Polynomial out(*this);
  out -= other;
  return out;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  CheckSameDim(other);
  Polynomial out(dim_, std::max(prune_threshold_, other.prune_threshold_));
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) out.AddTerm(ma * mb, ca * cb);
  }
  return out;
}

Polynomial Polynomial::operator*(double scalar) const {
  Polynomial out(dim_, prune_threshold_);
  for (const auto& [m, c] : terms_) out.AddTerm(m, c * scalar);
  return out;
}

double Polynomial::Evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("Polynomial::Evaluate: point dimension mismatch");
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Polynomial::Evaluate: non-finite point");
    }
  }
  double sum = 0.0;
  for (const auto& [m, c] : terms_) sum += c * m.Evaluate(x);
  return sum;
}

Polynomial Polynomial::Derivative(int index) const {
  if (index < 0 || index >= dim_) {
    throw std::out_of_range("Polynomial::Derivative: index out of range");
  }
  Polynomial out(dim_, prune_threshold_);
  for (const auto& [m, c] : terms_) {
    const int e = m[index];
    if (e == 0) continue;
    std::vector<int> exps(m.exponents().begin(), m.exponents().end());
    exps[index] -= 1;
    out.AddTerm(Monomial(std::move(exps)), c * e);
  }
  return out;
}

std::vector<Polynomial> Polynomial::Gradient() const {
  std::vector<Polynomial> grad;
  grad.reserve(dim_);
  for (int i = 0; i < dim_; ++i) grad.push_back(Derivative(i));
  return grad;
}

std::vector<Polynomial> Gradient(const Polynomial& p) { return p.Gradient(); }

double Polynomial::MaxAbsCoefficient() const {
  double m = 0.0;
  for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial Polynomial::Pruned(double threshold) const {
  Polynomial out(dim_, threshold);
  for (const auto& [m, c] : terms_) out.AddTerm(m, c);
  return out;
}

std::string Polynomial::ToText() const {
  std::string out = "dim " + std::to_string(dim_) + "\n";
  for (const auto& [m, c] : terms_) {
    out += FormatDouble17(c);
    for (int e : m.exponents()) out += " " + std::to_string(e);
    out += "\n";
  }
  return out;
}

Polynomial Polynomial::FromText(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int dim = -1;
  Polynomial p;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (dim < 0) {
      std::string key;
      if (!(ls >> key >> dim) || key != "dim" || dim < 1) {
        throw std::invalid_argument("Polynomial::FromText: expected 'dim d' header");
      }
      p = Polynomial(dim);
      continue;
    }
    std::string coef_token;
    ls >> coef_token;
    double coef = 0.0;
    const auto* first = coef_token.data();
    const auto* last = first + coef_token.size();
    if (auto [ptr, ec] = std::from_chars(first, last, coef);
        ec != std::errc() || ptr != last) {
      throw std::invalid_argument("Polynomial::FromText: bad coefficient on line " +
                                  std::to_string(line_no));
    }
    std::vector<int> exps(dim);
    for (int i = 0; i < dim; ++i) {
      if (!(ls >> exps[i]) || exps[i] < 0) {
        throw std::invalid_argument("Polynomial::FromText: bad exponents on line " +
                                    std::to_string(line_no));
      }
    }
    std::string extra;
    if (ls >> extra) {
      throw std::invalid_argument("Polynomial::FromText: trailing data on line " +
                                  std::to_string(line_no));
    }
    p.AddTerm(Monomial(std::move(exps)), coef);
  }
  if (dim < 0) throw std::invalid_argument("Polynomial::FromText: empty input");
  return p;
}

std::string Polynomial::ToString(std::span<const std::string> names) const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  out.precision(10);
  bool first = true;
  // Highest degree first reads more naturally.
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (m.degree() == 0) {
      out << mag;
    } else {
      if (mag != 1.0) out << mag << "*";
      out << m.ToString(names);
    }
  }
  return out.str();
}

Polynomial AffineRescale(const Polynomial& p, std::span<const double> scales,
                         std::span<const double> shifts) {
  const int d = p.dim();
  if (static_cast<int>(scales.size()) != d || static_cast<int>(shifts.size()) != d) {
    throw std::invalid_argument("AffineRescale: parameter size mismatch");
  }
  for (double s : scales) {
    if (!(s > 0.0)) throw std::invalid_argument("AffineRescale: scales must be positive");
  }
  // Powers of each substituted variable, built once per needed exponent.
  std::vector<std::vector<Polynomial>> powers(d);
  for (int i = 0; i < d; ++i) {
    int max_e = 0;
    for (const auto& [m, c] : p.terms()) max_e = std::max(max_e, m[i]);
    Polynomial lin = Polynomial::Variable(d, i) * scales[i];
    if (shifts[i] != 0.0) lin += Polynomial::Constant(d, shifts[i]);
    powers[i].push_back(Polynomial::Constant(d, 1.0));
    for (int k = 1; k <= max_e; ++k) powers[i].push_back(powers[i].back() * lin);
  }
  Polynomial out(d, p.prune_threshold());
  for (const auto& [m, c] : p.terms()) {
    Polynomial term = Polynomial::Constant(d, c);
    for (int i = 0; i < d; ++i) {
      if (m[i] > 0) term = term * powers[i][m[i]];
    }
    out += term;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expression parser

namespace {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view src, std::span<const std::string> vars,
                   const std::map<std::string, double>& constants)
      : src_(src), vars_(vars), constants_(constants),
        dim_(static_cast<int>(vars.size())) {}

  Polynomial Parse() {
    Polynomial p = ParseSum();
    SkipSpace();
    if (pos_ != src_.size()) Fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw std::invalid_argument("ParsePolynomial: " + what + " at position " +
                                std::to_string(pos_) + " in '" + std::string(src_) +
                                "'");
  }

  void SkipSpace() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool Accept(char c) {
    SkipSpace();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial ParseSum() {
    Polynomial acc = ParseProduct();
    while (true) {
      if (Accept('+')) {
        acc += ParseProduct();
      } else if (Accept('-')) {
        acc -= ParseProduct();
      } else {
        return acc;
      }
    }
  }

  Polynomial ParseProduct() {
    Polynomial acc = ParseUnary();
    while (true) {
      if (Accept('*')) {
        acc = acc * ParseUnary();
      } else if (Accept('/')) {
        Polynomial den = ParseUnary();
        if (den.degree() != 0 || den.constant_term() == 0.0) {
          Fail("division only by nonzero constants");
        }
        acc = acc * (1.0 / den.constant_term());
      } else {
        return acc;
      }
    }
  }

  Polynomial ParseUnary() {
    if (Accept('-')) return -ParseUnary();
    if (Accept('+')) return ParseUnary();
    return ParsePower();
  }

  Polynomial ParsePower() {
    Polynomial base = ParseAtom();
    if (Accept('^')) {
      SkipSpace();
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
      if (start == pos_) Fail("expected integer exponent");
      const int e = std::stoi(std::string(src_.substr(start, pos_ - start)));
      Polynomial out = Polynomial::Constant(dim_, 1.0);
      for (int k = 0; k < e; ++k) out = out * base;
      return out;
    }
    return base;
  }

  Polynomial ParseAtom() {
    SkipSpace();
    if (pos_ >= src_.size()) Fail("unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = ParseSum();
      if (!Accept(')')) Fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value = 0.0;
      const char* first = src_.data() + pos_;
      const char* last = src_.data() + src_.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc()) Fail("bad number");
      pos_ += static_cast<std::size_t>(ptr - first);
      return Polynomial::Constant(dim_, value);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name(src_.substr(start, pos_ - start));
      for (int i = 0; i < dim_; ++i) {
        if (vars_[i] == name) return Polynomial::Variable(dim_, i);
      }
      if (auto it = constants_.find(name); it != constants_.end()) {
        return Polynomial::Constant(dim_, it->second);
      }
      Fail("unknown identifier '" + name + "'");
    }
    Fail("unexpected character");
  }

  std::string_view src_;
  std::span<const std::string> vars_;
  const std::map<std::string, double>& constants_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial ParsePolynomial(std::string_view expression,
                           std::span<const std::string> variables,
                           const std::map<std::string, double>& constants) {
  if (variables.empty()) throw std::invalid_argument("ParsePolynomial: no variables");
  return ExpressionParser(expression, variables, constants).Parse();
}

std::uint64_t Fnv1aHash(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ergobound
