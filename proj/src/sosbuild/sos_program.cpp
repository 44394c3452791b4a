#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergobound/sos_program.hpp"

namespace ergobound {

VariableScaling VariableScaling::Identity(int dim) {
  return {std::vector<double>(dim, 1.0), std::vector<double>(dim, 0.0)};
}

VariableScaling VariableScaling::DefaultFor(const PolySystem& system) {
  if (system.name() == "lorenz" && system.dim() == 3) {
    return {{10.0, 10.0, 30.0}, {0.0, 0.0, 0.0}};
  }
  return Identity(system.dim());
}

SosBoundProgram BuildBoundProgram(const PolySystem& system, const Polynomial& phi,
                                  int aux_degree, const SosOptions& options) {
  if (aux_degree < 2 || aux_degree % 2 != 0) {
    throw std::invalid_argument("BuildBoundProgram: aux_degree must be even and >= 2");
  }
  const int d = system.dim();
  if (phi.dim() != d) throw std::invalid_argument("BuildBoundProgram: dimension mismatch");

  SosBoundProgram prog;
  prog.system = system;
  prog.phi = phi;
  prog.aux_degree = aux_degree;
  prog.scaling = options.scaling.value_or(VariableScaling::DefaultFor(system));
  if (static_cast<int>(prog.scaling.scales.size()) != d ||
      static_cast<int>(prog.scaling.shifts.size()) != d) {
    throw std::invalid_argument("BuildBoundProgram: scaling dimension mismatch");
  }

  prog.scaled_system = system.Rescaled(prog.scaling.scales, prog.scaling.shifts);
  Polynomial scaled_phi = AffineRescale(phi, prog.scaling.scales, prog.scaling.shifts);
  prog.objective_scale = 1.0;
  if (options.normalize_objective && !scaled_phi.is_zero()) {
    prog.objective_scale = scaled_phi.MaxAbsCoefficient();
  }
  prog.scaled_phi = scaled_phi * (1.0 / prog.objective_scale);

  // V is defined up to a constant, so the constant monomial is left out.
  prog.v_basis = MonomialRange(d, 1, aux_degree);
  prog.lie_columns.reserve(prog.v_basis.size());
  for (const auto& m : prog.v_basis) {
    prog.lie_columns.push_back(LieDerivative(prog.scaled_system, Polynomial::FromTerm(m, 1.0)));
  }

  const int lie_degree = aux_degree + std::max(system.degree(), 1) - 1;
  prog.residual_degree = std::max(phi.degree(), lie_degree);
  // Terms above the largest even degree have no Gram counterpart; their
  // coefficients are forced to vanish by the matching equalities.
  const int half = prog.residual_degree / 2;
  prog.gram_basis = MonomialBasis(d, half);

  if (options.ball) {
    const auto& ball = *options.ball;
    if (static_cast<int>(ball.center.size()) != d || !(ball.radius > 0.0)) {
      throw std::invalid_argument("BuildBoundProgram: bad ball constraint");
    }
    if (half < 1) throw std::invalid_argument("BuildBoundProgram: ball needs residual degree >= 2");
    prog.ball = ball;
    Polynomial q = Polynomial::Constant(d, ball.radius * ball.radius);
    for (int i = 0; i < d; ++i) {
      Polynomial xi = Polynomial::Variable(d, i) - Polynomial::Constant(d, ball.center[i]);
      q -= xi * xi;
    }
    prog.scaled_ball = AffineRescale(q, prog.scaling.scales, prog.scaling.shifts);
    prog.multiplier_basis = MonomialBasis(d, half - 1);
  }

  prog.constraint_monomials = MonomialBasis(d, prog.residual_degree);
  for (int i = 0; i < static_cast<int>(prog.constraint_monomials.size()); ++i) {
    prog.constraint_index.emplace(prog.constraint_monomials[i], i);
  }
  return prog;
}

namespace {

// Adds sum_{i<=j} G_ij * weight * basis_i * basis_j * term to the constraints.
void AddGramTerms(const SosBoundProgram& prog, const std::vector<Monomial>& basis,
                  const Polynomial& factor, int block, std::vector<SdpConstraint>& cons) {
  const int n = static_cast<int>(basis.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Monomial bij = basis[i] * basis[j];
      for (const auto& [m, w] : factor.terms()) {
        const auto it = prog.constraint_index.find(bij * m);
        if (it == prog.constraint_index.end()) {
          throw std::logic_error("AssembleSdp: Gram product outside constraint range");
        }
        // <A, X> counts an off-diagonal entry twice, matching 2 G_ij b_i b_j.
        cons[it->second].blocks[block].push_back({i, j, w});
      }
    }
  }
}

void MergeDuplicates(SparseSym& entries) {
  std::sort(entries.begin(), entries.end(), [](const SymEntry& a, const SymEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseSym merged;
  for (const auto& e : entries) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const SymEntry& e) { return e.value == 0.0; });
  entries = std::move(merged);
}

}  // namespace

SdpProblem AssembleSdp(const SosBoundProgram& prog) {
  SdpProblem sdp;
  const int d = prog.system.dim();
  const int nblocks = prog.ball ? 2 : 1;
  sdp.block_sizes.push_back(static_cast<int>(prog.gram_basis.size()));
  if (prog.ball) sdp.block_sizes.push_back(static_cast<int>(prog.multiplier_basis.size()));
  sdp.num_free = prog.num_free();
  sdp.free_objective.assign(sdp.num_free, 0.0);
  sdp.free_objective[0] = 1.0;
  sdp.block_objective.assign(nblocks, {});

  // Row alpha:  <Gram terms>_alpha + sum_j v_j (f.grad m_j)_alpha - U [alpha = 1]
  //             = -Phi_alpha
  const int m = static_cast<int>(prog.constraint_monomials.size());
  sdp.constraints.resize(m);
  for (int i = 0; i < m; ++i) {
    sdp.constraints[i].blocks.assign(nblocks, {});
    sdp.constraints[i].rhs = -prog.scaled_phi.coefficient(prog.constraint_monomials[i]);
  }
  sdp.constraints[prog.constraint_index.at(Monomial::One(d))].free.emplace_back(0, -1.0);
  for (int j = 0; j < static_cast<int>(prog.v_basis.size()); ++j) {
    for (const auto& [mono, c] : prog.lie_columns[j].terms()) {
      sdp.constraints[prog.constraint_index.at(mono)].free.emplace_back(1 + j, c);
    }
  }
  for (auto& con : sdp.constraints) {
    std::sort(con.free.begin(), con.free.end());
  }

  AddGramTerms(prog, prog.gram_basis, Polynomial::Constant(d, 1.0), 0, sdp.constraints);
  if (prog.ball) AddGramTerms(prog, prog.multiplier_basis, prog.scaled_ball, 1, sdp.constraints);
  for (auto& con : sdp.constraints) {
    for (auto& blk : con.blocks) MergeDuplicates(blk);
  }
  return sdp;
}

}  // namespace ergobound
