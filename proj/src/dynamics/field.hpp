#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ergobound/dynamics.hpp"

namespace ergobound {

// Flattened term list for fast evaluation of a polynomial vector field.
class CompiledField {
 public:
  explicit CompiledField(const PolySystem& system) : dim_(system.dim()) {
    for (int c = 0; c < dim_; ++c) {
      for (const auto& [m, coef] : system.component(c).terms()) {
        component_.push_back(c);
        coef_.push_back(coef);
        for (int i = 0; i < dim_; ++i) exps_.push_back(m[i]);
      }
    }
  }

  void Evaluate(std::span<const double> x, std::span<double> out) const {
    for (int i = 0; i < dim_; ++i) out[i] = 0.0;
    for (std::size_t t = 0; t < coef_.size(); ++t) {
      double v = coef_[t];
      const int* e = exps_.data() + t * dim_;
      for (int i = 0; i < dim_; ++i) {
        for (int p = 0; p < e[i]; ++p) v *= x[i];
      }
      out[component_[t]] += v;
    }
  }

 private:
  int dim_;
  std::vector<int> component_;
  std::vector<double> coef_;
  std::vector<int> exps_;
};

// One Dormand-Prince step at a time; the slope at the current point is kept
// between steps (first same as last).
class Stepper {
 public:
  Stepper(const PolySystem& system, const IntegratorOptions& options);

  const IntegratorOptions& options() const { return options_; }
  long evaluations() const { return evaluations_; }
  void SetSlope(std::span<const double> x);
  double InitialStep(std::span<const double> x, double hmax);
  /// Computes the step of size h from x; returns the scaled error norm.
  double Attempt(std::span<const double> x, double h);
  /// Stores the continuous extension of the last attempt and advances the slope.
  void Accept(std::span<const double> x, double h);
  std::span<const double> x1() const { return x1_; }
  std::span<const double> dense() const { return dense_; }

 private:
  CompiledField field_;
  IntegratorOptions options_;
  int n_;
  long evaluations_ = 0;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, x1_, err_, dense_;
};

// Advances traj (from its last point) to t_end; stops early when after_step
// returns true.
void AdvanceAdaptive(Stepper& stepper, Trajectory& traj, double t_end,
                     const std::function<bool(Trajectory&)>& after_step);

double RefineCrossing(const Trajectory& traj, std::size_t step, const SectionSpec& section,
                      std::vector<double>& x);

}  // namespace ergobound
