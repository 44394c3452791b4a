#include "ergobound/poly_system.hpp"

#include <algorithm>
#include <stdexcept>

namespace ergobound {

PolySystem::PolySystem(std::vector<Polynomial> components,
                       std::vector<std::string> variable_names,
                       std::map<std::string, double> parameters, std::string name)
    : components_(std::move(components)),
      names_(std::move(variable_names)),
      parameters_(std::move(parameters)),
      name_(std::move(name)) {
  const int d = dim();
  if (d < 1) throw std::invalid_argument("PolySystem: no components");
  for (const auto& c : components_) {
    if (c.dim() != d) {
      throw std::invalid_argument("PolySystem: component dimension differs from system dimension");
    }
  }
  if (names_.empty()) {
    for (int i = 0; i < d; ++i) {
      names_.push_back(d <= 3 ? std::string(1, "xyz"[i]) : "x" + std::to_string(i + 1));
    }
  }
  if (static_cast<int>(names_.size()) != d) {
    throw std::invalid_argument("PolySystem: variable name count mismatch");
  }
}

PolySystem PolySystem::Lorenz(const LorenzParameters& p) {
  const int d = 3;
  const Polynomial x = Polynomial::Variable(d, 0);
  const Polynomial y = Polynomial::Variable(d, 1);
  const Polynomial z = Polynomial::Variable(d, 2);
  std::vector<Polynomial> f = {
      (y - x) * p.sigma,
      x * (Polynomial::Constant(d, p.r) - z) - y,
      x * y - z * p.beta,
  };
  return PolySystem(std::move(f), {"x", "y", "z"},
                    {{"beta", p.beta}, {"sigma", p.sigma}, {"r", p.r}}, "lorenz");
}

int PolySystem::degree() const {
  int deg = 0;
  for (const auto& c : components_) deg = std::max(deg, c.degree());
  return deg;
}

void PolySystem::Evaluate(std::span<const double> x, std::span<double> out) const {
  for (int i = 0; i < dim(); ++i) out[i] = components_[i].Evaluate(x);
}

std::vector<double> PolySystem::Evaluate(std::span<const double> x) const {
  std::vector<double> out(dim());
  Evaluate(x, out);
  return out;
}

PolySystem PolySystem::Rescaled(std::span<const double> scales,
                                std::span<const double> shifts) const {
  std::vector<Polynomial> f;
  f.reserve(dim());
  for (int i = 0; i < dim(); ++i) {
    f.push_back(AffineRescale(components_[i], scales, shifts) * (1.0 / scales[i]));
  }
  return PolySystem(std::move(f), names_, parameters_, name_);
}

Polynomial LieDerivative(const PolySystem& system, const Polynomial& v) {
  if (system.dim() != v.dim()) {
    throw std::invalid_argument("LieDerivative: dimension mismatch");
  }
  Polynomial out(v.dim(), v.prune_threshold());
  for (int i = 0; i < system.dim(); ++i) {
    Polynomial dv = v.Derivative(i);
    if (dv.is_zero()) continue;
    out += system.component(i) * dv;
  }
  return out;
}

}  // namespace ergobound
