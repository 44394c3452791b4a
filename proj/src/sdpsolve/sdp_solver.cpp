#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "ergobound/sdp.hpp"

namespace ergobound {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view ToString(SdpStatus status) {
  switch (status) {
    case SdpStatus::kConverged:
      return "converged";
    case SdpStatus::kMaxIterations:
      return "max-iterations";
    case SdpStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

void SdpProblem::Validate() const {
  const int nb = static_cast<int>(block_sizes.size());
  for (int n : block_sizes) {
    if (n < 1) throw std::invalid_argument("SdpProblem: block size must be >= 1");
  }
  if (num_free < 0 || static_cast<int>(free_objective.size()) != num_free) {
    throw std::invalid_argument("SdpProblem: free objective size mismatch");
  }
  if (static_cast<int>(block_objective.size()) != nb) {
    throw std::invalid_argument("SdpProblem: block objective count mismatch");
  }
  auto check_entries = [&](const SparseSym& entries, int n) {
    for (const auto& e : entries) {
      if (e.row < 0 || e.col >= n || e.row > e.col) {
        throw std::invalid_argument("SdpProblem: entry index out of range or below diagonal");
      }
      if (!std::isfinite(e.value)) throw std::invalid_argument("SdpProblem: non-finite entry");
    }
  };
  for (int b = 0; b < nb; ++b) check_entries(block_objective[b], block_sizes[b]);
  for (double c : free_objective) {
    if (!std::isfinite(c)) throw std::invalid_argument("SdpProblem: non-finite objective");
  }
  for (const auto& con : constraints) {
    if (static_cast<int>(con.blocks.size()) != nb) {
      throw std::invalid_argument("SdpProblem: constraint block count mismatch");
    }
    for (int b = 0; b < nb; ++b) check_entries(con.blocks[b], block_sizes[b]);
    for (const auto& [k, v] : con.free) {
      if (k < 0 || k >= num_free || !std::isfinite(v)) {
        throw std::invalid_argument("SdpProblem: bad free-variable coefficient");
      }
    }
    if (!std::isfinite(con.rhs)) throw std::invalid_argument("SdpProblem: non-finite rhs");
  }
}

double Inner(const SparseSym& a, const MatrixXd& x) {
  double s = 0.0;
  for (const auto& e : a) {
    s += e.row == e.col ? e.value * x(e.row, e.col)
                        : e.value * (x(e.row, e.col) + x(e.col, e.row));
  }
  return s;
}

namespace {

double FrobeniusSq(const SparseSym& a) {
  double s = 0.0;
  for (const auto& e : a) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
  return s;
}

void AddScaled(const SparseSym& a, double scale, MatrixXd& out) {
  for (const auto& e : a) {
    out(e.row, e.col) += scale * e.value;
    if (e.row != e.col) out(e.col, e.row) += scale * e.value;
  }
}

MatrixXd Symmetrized(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double InnerDense(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].array() * b[k].array()).sum();
  return s;
}

double NormSq(const std::vector<MatrixXd>& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return s;
}

// Problem data after row normalization and objective/rhs scaling.
struct ScaledData {
  int m = 0;
  int nf = 0;
  std::vector<int> sizes;
  MatrixXd free_coeffs;                 // m x nf
  std::vector<std::vector<SparseSym>> a;  // [block][constraint]
  VectorXd b;
  VectorXd c;
  std::vector<MatrixXd> objective;
  VectorXd row_norm;
  double b_scale = 1.0;
  double c_scale = 1.0;
  int num_original = 0;
  std::vector<int> kept;         // original indices of the rows kept
  double inconsistency = 0.0;    // residual of dropped rows against kept ones
};

// Rows of the normalized constraint matrix [a_i, vec(A_i)] that are linearly
// independent; dependent rows are dropped before the Newton systems are formed.
// Off-diagonal entries carry a sqrt(2) weight so the Euclidean inner product of
// two rows equals the trace inner product of the constraint matrices.
std::vector<int> IndependentRows(const SdpProblem& p, const VectorXd& row_norm,
                                 const VectorXd& rhs, double& inconsistency) {
  const int m = p.num_constraints();
  const int nb = static_cast<int>(p.block_sizes.size());
  std::vector<int> offset(nb + 1, p.num_free);
  for (int b = 0; b < nb; ++b) offset[b + 1] = offset[b] + p.block_sizes[b] * (p.block_sizes[b] + 1) / 2;
  const int ncols = offset[nb];
  MatrixXd dt = MatrixXd::Zero(ncols, m);
  for (int i = 0; i < m; ++i) {
    const auto& con = p.constraints[i];
    for (const auto& [k, v] : con.free) dt(k, i) += v / row_norm(i);
    for (int b = 0; b < nb; ++b) {
      const int n = p.block_sizes[b];
      for (const auto& e : con.blocks[b]) {
        // Packed upper-triangle index of (row, col).
        const int idx = offset[b] + e.row * n - e.row * (e.row - 1) / 2 + (e.col - e.row);
        dt(idx, i) += (e.row == e.col ? 1.0 : std::sqrt(2.0)) * e.value / row_norm(i);
      }
    }
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(dt);
  qr.setThreshold(1e-11);
  const int rank = static_cast<int>(qr.rank());
  std::vector<int> kept(rank);
  for (int r = 0; r < rank; ++r) kept[r] = qr.colsPermutation().indices()(r);
  std::sort(kept.begin(), kept.end());
  inconsistency = 0.0;
  if (rank < m) {
    std::vector<char> is_kept(m, 0);
    for (int k : kept) is_kept[k] = 1;
    MatrixXd basis(ncols, rank);
    VectorXd basis_rhs(rank);
    for (int r = 0; r < rank; ++r) {
      basis.col(r) = dt.col(kept[r]);
      basis_rhs(r) = rhs(kept[r]) / row_norm(kept[r]);
    }
    Eigen::ColPivHouseholderQR<MatrixXd> bqr(basis);
    for (int i = 0; i < m; ++i) {
      if (is_kept[i]) continue;
      const VectorXd w = bqr.solve(VectorXd(dt.col(i)));
      inconsistency = std::max(inconsistency, std::abs(rhs(i) / row_norm(i) - w.dot(basis_rhs)));
    }
  }
  return kept;
}

ScaledData Prepare(const SdpProblem& p) {
  ScaledData d;
  d.m = p.num_constraints();
  d.num_original = d.m;
  d.nf = p.num_free;
  d.sizes = p.block_sizes;
  const int nb = static_cast<int>(p.block_sizes.size());
  d.free_coeffs = MatrixXd::Zero(d.m, d.nf);
  d.a.assign(nb, std::vector<SparseSym>(d.m));
  d.b.resize(d.m);
  d.row_norm.resize(d.m);
  for (int i = 0; i < d.m; ++i) {
    const auto& con = p.constraints[i];
    double sq = 0.0;
    for (const auto& [k, v] : con.free) d.free_coeffs(i, k) += v;
    sq += d.free_coeffs.row(i).squaredNorm();
    for (int bl = 0; bl < nb; ++bl) sq += FrobeniusSq(con.blocks[bl]);
    const double norm = sq > 0.0 ? std::sqrt(sq) : 1.0;
    d.row_norm(i) = norm;
    d.free_coeffs.row(i) /= norm;
    for (int bl = 0; bl < nb; ++bl) {
      d.a[bl][i] = con.blocks[bl];
      for (auto& e : d.a[bl][i]) e.value /= norm;
    }
    d.b(i) = con.rhs / norm;
  }
  {
    VectorXd raw_rhs(d.m);
    for (int i = 0; i < d.m; ++i) raw_rhs(i) = p.constraints[i].rhs;
    d.kept = IndependentRows(p, d.row_norm, raw_rhs, d.inconsistency);
    const int mk = static_cast<int>(d.kept.size());
    if (mk < d.m) {
      MatrixXd fc(mk, d.nf);
      VectorXd bk(mk), rn(mk);
      std::vector<std::vector<SparseSym>> ak(nb, std::vector<SparseSym>(mk));
      for (int r = 0; r < mk; ++r) {
        const int i = d.kept[r];
        fc.row(r) = d.free_coeffs.row(i);
        bk(r) = d.b(i);
        rn(r) = d.row_norm(i);
        for (int bl = 0; bl < nb; ++bl) ak[bl][r] = std::move(d.a[bl][i]);
      }
      d.free_coeffs = std::move(fc);
      d.b = std::move(bk);
      d.row_norm = std::move(rn);
      d.a = std::move(ak);
      d.m = mk;
    }
  }
  d.c = Eigen::Map<const VectorXd>(p.free_objective.data(), d.nf);
  d.objective.resize(nb);
  double c_norm_sq = d.c.squaredNorm();
  for (int bl = 0; bl < nb; ++bl) {
    d.objective[bl] = MatrixXd::Zero(d.sizes[bl], d.sizes[bl]);
    AddScaled(p.block_objective[bl], 1.0, d.objective[bl]);
    c_norm_sq += d.objective[bl].squaredNorm();
  }
  d.b_scale = std::max(1.0, d.b.norm());
  d.c_scale = std::max(1.0, std::sqrt(c_norm_sq));
  d.b /= d.b_scale;
  d.c /= d.c_scale;
  for (auto& o : d.objective) o /= d.c_scale;
  return d;
}

struct Iterate {
  std::vector<MatrixXd> x;
  VectorXd u;
  VectorXd y;
  std::vector<MatrixXd> z;
};

class InteriorPointSolver {
 public:
  InteriorPointSolver(const ScaledData& data, const SdpOptions& options)
      : d_(data), opt_(options), nb_(static_cast<int>(data.sizes.size())) {
    for (int n : d_.sizes) n_total_ += n;
  }

  SdpSolution Run();

 private:
  VectorXd ApplyA(const std::vector<MatrixXd>& x) const {
    VectorXd out = VectorXd::Zero(d_.m);
    for (int bl = 0; bl < nb_; ++bl) {
      for (int i = 0; i < d_.m; ++i) out(i) += Inner(d_.a[bl][i], x[bl]);
    }
    return out;
  }

  std::vector<MatrixXd> ApplyAT(const VectorXd& y) const {
    std::vector<MatrixXd> out(nb_);
    for (int bl = 0; bl < nb_; ++bl) {
      out[bl] = MatrixXd::Zero(d_.sizes[bl], d_.sizes[bl]);
      for (int i = 0; i < d_.m; ++i) {
        if (y(i) != 0.0) AddScaled(d_.a[bl][i], y(i), out[bl]);
      }
    }
    return out;
  }

  void InitialPoint(Iterate& it) const;
  MatrixXd SchurComplement(const std::vector<MatrixXd>& x,
                           const std::vector<MatrixXd>& zinv) const;
  double MaxStep(const MatrixXd& x, const MatrixXd& dx, bool& ok) const;

  const ScaledData& d_;
  const SdpOptions& opt_;
  int nb_;
  int n_total_ = 0;
};

void InteriorPointSolver::InitialPoint(Iterate& it) const {
  it.x.resize(nb_);
  it.z.resize(nb_);
  for (int bl = 0; bl < nb_; ++bl) {
    const int n = d_.sizes[bl];
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, sqrt_n);
    double eta = std::max(10.0, sqrt_n);
    for (int i = 0; i < d_.m; ++i) {
      const double a_norm = std::sqrt(FrobeniusSq(d_.a[bl][i]));
      xi = std::max(xi, n * (1.0 + std::abs(d_.b(i))) / (1.0 + a_norm));
      eta = std::max(eta, (1.0 + a_norm) / sqrt_n);
    }
    eta = std::max(eta, (1.0 + d_.objective[bl].norm()) / sqrt_n);
    it.x[bl] = xi * MatrixXd::Identity(n, n);
    it.z[bl] = eta * MatrixXd::Identity(n, n);
  }
  it.u = VectorXd::Zero(d_.nf);
  it.y = VectorXd::Zero(d_.m);
}

// M_ij = sum_b <A_ib, X_b A_jb Z_b^{-1}>.
MatrixXd InteriorPointSolver::SchurComplement(const std::vector<MatrixXd>& x,
                                              const std::vector<MatrixXd>& zinv) const {
  MatrixXd schur = MatrixXd::Zero(d_.m, d_.m);
  for (int bl = 0; bl < nb_; ++bl) {
    const int n = d_.sizes[bl];
    const MatrixXd& xb = x[bl];
    const MatrixXd& zb = zinv[bl];
    MatrixXd g(n, n);
    for (int j = 0; j < d_.m; ++j) {
      const SparseSym& aj = d_.a[bl][j];
      if (aj.empty()) continue;
      g.setZero();
      for (const auto& e : aj) {
        g.noalias() += e.value * xb.col(e.row) * zb.row(e.col);
        if (e.row != e.col) g.noalias() += e.value * xb.col(e.col) * zb.row(e.row);
      }
      for (int i = 0; i < d_.m; ++i) {
        if (!d_.a[bl][i].empty()) schur(i, j) += Inner(d_.a[bl][i], g);
      }
    }
  }
  return Symmetrized(schur);
}

double InteriorPointSolver::MaxStep(const MatrixXd& x, const MatrixXd& dx, bool& ok) const {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) {
    ok = false;
    return 0.0;
  }
  const MatrixXd linv_dx = llt.matrixL().solve(dx);
  const MatrixXd w = llt.matrixL().solve(linv_dx.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrized(w), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

SdpSolution InteriorPointSolver::Run() {
  SdpSolution sol;
  Iterate it;
  InitialPoint(it);
  Iterate best = it;
  double best_measure = std::numeric_limits<double>::infinity();
  double best_gap = 0.0, best_pinf = 0.0, best_dinf = 0.0;

  const double b_norm = d_.b.norm();
  double c_norm_sq = d_.c.squaredNorm();
  for (const auto& o : d_.objective) c_norm_sq += o.squaredNorm();
  const double c_norm = std::sqrt(c_norm_sq);

  int stall_count = 0;
  bool stopped = false;
  int iter = 0;
  for (; iter <= opt_.max_iterations; ++iter) {
    // Residuals.
    const VectorXd rp = d_.b - ApplyA(it.x) - d_.free_coeffs * it.u;
    std::vector<MatrixXd> rd = ApplyAT(it.y);
    for (int bl = 0; bl < nb_; ++bl) rd[bl] = d_.objective[bl] - rd[bl] - it.z[bl];
    const VectorXd rf = d_.c - d_.free_coeffs.transpose() * it.y;

    const double pobj = d_.c.dot(it.u) + InnerDense(d_.objective, it.x);
    const double dobj = d_.b.dot(it.y);
    const double xz = InnerDense(it.x, it.z);
    const double mu = xz / n_total_;
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double rel_gap = std::max(std::abs(pobj - dobj), xz) / denom;
    const double pinf = rp.norm() / (1.0 + b_norm);
    const double dinf = std::sqrt(NormSq(rd) + rf.squaredNorm()) / (1.0 + c_norm);

    if (opt_.check_weak_duality) {
      // pobj - dobj = <X,Z> + <rd,X> + u.rf - y.rp holds identically; with
      // <X,Z> >= 0 this bounds the duality gap from below.
      const double slack = std::abs(InnerDense(rd, it.x)) + std::abs(it.u.dot(rf)) +
                           std::abs(it.y.dot(rp));
      if (pobj - dobj < -slack - 1e-9 * denom) ++sol.weak_duality_violations;
    }

    const double measure = std::max({rel_gap, pinf, dinf});
    if (measure < best_measure) {
      best_measure = measure;
      best = it;
      best_gap = rel_gap;
      best_pinf = pinf;
      best_dinf = dinf;
      sol.iterations = iter;
    }
    if (opt_.verbosity > 0) {
      std::fprintf(stderr, "%3d  pobj % .10e  dobj % .10e  gap %.2e  pinf %.2e  dinf %.2e\n",
                   iter, pobj, dobj, rel_gap, pinf, dinf);
    }
    if (rel_gap <= opt_.gap_tol && pinf <= opt_.feas_tol && dinf <= opt_.feas_tol) {
      best = it;
      best_gap = rel_gap;
      best_pinf = pinf;
      best_dinf = dinf;
      sol.iterations = iter;
      sol.status = SdpStatus::kConverged;
      stopped = true;
      break;
    }
    if (iter == opt_.max_iterations) break;

    // Z^{-1} per block.
    std::vector<MatrixXd> zinv(nb_);
    bool factor_ok = true;
    for (int bl = 0; bl < nb_; ++bl) {
      Eigen::LLT<MatrixXd> llt(it.z[bl]);
      if (llt.info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      zinv[bl] = llt.solve(MatrixXd::Identity(d_.sizes[bl], d_.sizes[bl]));
      zinv[bl] = Symmetrized(zinv[bl]);
    }
    if (!factor_ok) {
      sol.status = SdpStatus::kNumericalFailure;
      sol.message = "dual slack lost positive definiteness";
      stopped = true;
      break;
    }

    MatrixXd schur = SchurComplement(it.x, zinv);
    const int nk = d_.m + d_.nf;
    MatrixXd kkt;
    Eigen::LLT<MatrixXd> schur_llt;
    Eigen::PartialPivLU<MatrixXd> kkt_lu;
    // Rows carrying only free-variable coefficients make M singular on its
    // own; with free variables the augmented matrix [M B; B^T 0] is factored.
    auto factor = [&](double reg) -> bool {
      if (d_.nf == 0) {
        MatrixXd mreg = schur;
        mreg.diagonal().array() += reg;
        schur_llt.compute(mreg);
        return schur_llt.info() == Eigen::Success;
      }
      kkt = MatrixXd::Zero(nk, nk);
      kkt.topLeftCorner(d_.m, d_.m) = schur;
      kkt.topLeftCorner(d_.m, d_.m).diagonal().array() += reg;
      kkt.topRightCorner(d_.m, d_.nf) = d_.free_coeffs;
      kkt.bottomLeftCorner(d_.nf, d_.m) = d_.free_coeffs.transpose();
      kkt.bottomRightCorner(d_.nf, d_.nf).diagonal().array() -= reg;
      kkt_lu.compute(kkt);
      const double rcond = kkt_lu.rcond();
      return std::isfinite(rcond) && rcond > 0.0;
    };
    if (!factor(0.0)) {
      const double reg = 1e-12 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      if (!factor(reg)) {
        sol.status = SdpStatus::kNumericalFailure;
        sol.message = "Schur complement is not positive definite";
        stopped = true;
        break;
      }
    }

    // Solves for a direction given the complementarity target
    // dX = R - X dZ Z^{-1}.
    auto direction = [&](const std::vector<MatrixXd>& r, std::vector<MatrixXd>& dx,
                         VectorXd& du, VectorXd& dy, std::vector<MatrixXd>& dz) {
      std::vector<MatrixXd> t(nb_);
      for (int bl = 0; bl < nb_; ++bl) t[bl] = r[bl] - it.x[bl] * rd[bl] * zinv[bl];
      const VectorXd h = rp - ApplyA(t);
      if (d_.nf > 0) {
        VectorXd rhs(nk);
        rhs << h, rf;
        VectorXd sol_vec = kkt_lu.solve(rhs);
        for (int refine = 0; refine < 2; ++refine) {
          const VectorXd res = rhs - kkt * sol_vec;
          sol_vec += kkt_lu.solve(res);
        }
        dy = sol_vec.head(d_.m);
        du = sol_vec.tail(d_.nf);
      } else {
        dy = schur_llt.solve(h);
        du.resize(0);
      }
      dz = ApplyAT(dy);
      dx.resize(nb_);
      for (int bl = 0; bl < nb_; ++bl) {
        dz[bl] = rd[bl] - dz[bl];
        dx[bl] = Symmetrized(r[bl] - it.x[bl] * dz[bl] * zinv[bl]);
      }
    };

    auto step_lengths = [&](const std::vector<MatrixXd>& dx, const std::vector<MatrixXd>& dz,
                            double& ap, double& ad) -> bool {
      ap = ad = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (int bl = 0; bl < nb_; ++bl) {
        ap = std::min(ap, MaxStep(it.x[bl], dx[bl], ok));
        ad = std::min(ad, MaxStep(it.z[bl], dz[bl], ok));
      }
      return ok;
    };

    // Predictor.
    std::vector<MatrixXd> r(nb_);
    for (int bl = 0; bl < nb_; ++bl) r[bl] = -it.x[bl];
    std::vector<MatrixXd> dx_a, dz_a;
    VectorXd du_a, dy_a;
    direction(r, dx_a, du_a, dy_a, dz_a);
    double ap_max = 0.0, ad_max = 0.0;
    if (!step_lengths(dx_a, dz_a, ap_max, ad_max)) {
      sol.status = SdpStatus::kNumericalFailure;
      sol.message = "iterate lost positive definiteness";
      stopped = true;
      break;
    }
    const double ap_a = std::min(1.0, ap_max);
    const double ad_a = std::min(1.0, ad_max);
    double xz_aff = 0.0;
    for (int bl = 0; bl < nb_; ++bl) {
      xz_aff += ((it.x[bl] + ap_a * dx_a[bl]).array() * (it.z[bl] + ad_a * dz_a[bl]).array())
                    .sum();
    }
    const double mu_aff = std::max(0.0, xz_aff / n_total_);
    const double expon = std::max(1.0, 3.0 * std::pow(std::min(ap_a, ad_a), 2));
    const double sigma = std::min(1.0, std::pow(mu_aff / mu, expon));

    // Corrector.
    for (int bl = 0; bl < nb_; ++bl) {
      r[bl] = sigma * mu * zinv[bl] - it.x[bl] - dx_a[bl] * dz_a[bl] * zinv[bl];
    }
    std::vector<MatrixXd> dx, dz;
    VectorXd du, dy;
    direction(r, dx, du, dy, dz);
    if (!step_lengths(dx, dz, ap_max, ad_max)) {
      sol.status = SdpStatus::kNumericalFailure;
      sol.message = "iterate lost positive definiteness";
      stopped = true;
      break;
    }
    const double ap = std::min(1.0, opt_.step_fraction * ap_max);
    const double ad = std::min(1.0, opt_.step_fraction * ad_max);
    if (opt_.verbosity > 1) {
      const double lin = (ApplyA(dx) + d_.free_coeffs * du - rp).norm();
      std::fprintf(stderr, "     ap %.3e ad %.3e sigma %.3e  newton-res %.2e  |du| %.2e |u| %.2e\n", ap, ad, sigma, lin, du.norm(), it.u.norm());
    }

    for (int bl = 0; bl < nb_; ++bl) {
      it.x[bl] += ap * dx[bl];
      it.z[bl] += ad * dz[bl];
    }
    if (d_.nf > 0) it.u += ap * du;
    it.y += ad * dy;

    if (std::max(ap, ad) < 1e-8) {
      if (++stall_count >= 3) {
        sol.status = SdpStatus::kNumericalFailure;
        sol.message = "step lengths stalled";
        stopped = true;
        break;
      }
    } else {
      stall_count = 0;
    }
  }
  if (!stopped) {
    sol.status = SdpStatus::kMaxIterations;
    sol.message = "iteration cap reached";
  }
  // Report the best iterate seen; a converged run ends on it.
  const Iterate& out = best;
  sol.relative_gap = best_gap;
  sol.primal_infeasibility = best_pinf;
  sol.dual_infeasibility = best_dinf;

  // Undo the scaling.
  sol.blocks.resize(nb_);
  sol.slacks.resize(nb_);
  for (int bl = 0; bl < nb_; ++bl) {
    sol.blocks[bl] = d_.b_scale * out.x[bl];
    sol.slacks[bl] = d_.c_scale * out.z[bl];
  }
  sol.free = d_.b_scale * out.u;
  sol.dual = VectorXd::Zero(d_.num_original);
  for (int r = 0; r < d_.m; ++r) sol.dual(d_.kept[r]) = d_.c_scale * out.y(r) / d_.row_norm(r);
  return sol;
}

}  // namespace

SdpSolution SolveSdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.Validate();
  const ScaledData data = Prepare(problem);
  InteriorPointSolver solver(data, options);
  SdpSolution sol = solver.Run();

  const SdpResiduals res = ComputeResiduals(problem, sol);
  sol.primal_objective = res.primal_objective;
  sol.dual_objective = res.dual_objective;
  return sol;
}

SdpResiduals ComputeResiduals(const SdpProblem& problem, const SdpSolution& solution) {
  const int nb = static_cast<int>(problem.block_sizes.size());
  const int m = problem.num_constraints();
  SdpResiduals res;
  if (static_cast<int>(solution.blocks.size()) != nb ||
      solution.free.size() != problem.num_free) {
    throw std::invalid_argument("ComputeResiduals: solution shape mismatch");
  }
  const bool have_dual = solution.dual.size() == m &&
                         static_cast<int>(solution.slacks.size()) == nb;

  double primal_sq = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& con = problem.constraints[i];
    double lhs = 0.0;
    for (const auto& [k, v] : con.free) lhs += v * solution.free(k);
    for (int bl = 0; bl < nb; ++bl) lhs += Inner(con.blocks[bl], solution.blocks[bl]);
    primal_sq += (con.rhs - lhs) * (con.rhs - lhs);
  }
  res.primal_infeasibility = std::sqrt(primal_sq);

  res.primal_objective = 0.0;
  for (int k = 0; k < problem.num_free; ++k) {
    res.primal_objective += problem.free_objective[k] * solution.free(k);
  }
  for (int bl = 0; bl < nb; ++bl) {
    res.primal_objective += Inner(problem.block_objective[bl], solution.blocks[bl]);
  }

  if (have_dual) {
    double dual_sq = 0.0;
    VectorXd free_res = Eigen::Map<const VectorXd>(problem.free_objective.data(),
                                                   problem.num_free);
    for (int bl = 0; bl < nb; ++bl) {
      const int n = problem.block_sizes[bl];
      MatrixXd rd = MatrixXd::Zero(n, n);
      AddScaled(problem.block_objective[bl], 1.0, rd);
      for (int i = 0; i < m; ++i) AddScaled(problem.constraints[i].blocks[bl], -solution.dual(i), rd);
      rd -= solution.slacks[bl];
      dual_sq += rd.squaredNorm();
    }
    for (int i = 0; i < m; ++i) {
      for (const auto& [k, v] : problem.constraints[i].free) free_res(k) -= v * solution.dual(i);
      res.dual_objective += problem.constraints[i].rhs * solution.dual(i);
    }
    dual_sq += free_res.squaredNorm();
    res.dual_infeasibility = std::sqrt(dual_sq);
  }
  res.gap = res.primal_objective - res.dual_objective;
  return res;
}

}  // namespace ergobound
