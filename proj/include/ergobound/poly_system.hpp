#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ergobound/polynomial.hpp"

namespace ergobound {

/// Lorenz parameters; defaults are the standard chaotic values.
struct LorenzParameters {
  double beta = 8.0 / 3.0;
  double sigma = 10.0;
  double r = 28.0;
};

/// Polynomial vector field dx/dt = f(x) with named parameters.
class PolySystem {
 public:
  PolySystem() = default;
  PolySystem(std::vector<Polynomial> components, std::vector<std::string> variable_names,
             std::map<std::string, double> parameters = {}, std::string name = "custom");

  static PolySystem Lorenz(const LorenzParameters& params = {});

  int dim() const { return static_cast<int>(components_.size()); }
  const std::vector<Polynomial>& components() const { return components_; }
  const Polynomial& component(int i) const { return components_[i]; }
  const std::vector<std::string>& variable_names() const { return names_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }
  const std::string& name() const { return name_; }

  /// Maximum component degree.
  int degree() const;

  /// f(x), written into `out` (size d).
  void Evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> Evaluate(std::span<const double> x) const;

  /// The field expressed in coordinates x = scales .* x~ + shifts:
  /// f~(x~) = f(scales .* x~ + shifts) ./ scales.
  PolySystem Rescaled(std::span<const double> scales, std::span<const double> shifts) const;

 private:
  std::vector<Polynomial> components_;
  std::vector<std::string> names_;
  std::map<std::string, double> parameters_;
  std::string name_ = "custom";
};

/// f . grad V. Throws std::invalid_argument on dimension mismatch.
Polynomial LieDerivative(const PolySystem& system, const Polynomial& v);

}  // namespace ergobound
