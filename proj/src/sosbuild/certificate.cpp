#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

#include "ergobound/sos_program.hpp"

namespace ergobound {

using Eigen::MatrixXd;
using json = nlohmann::json;

namespace {

Polynomial GramPolynomial(const MatrixXd& gram, const std::vector<Monomial>& basis, int dim) {
  Polynomial out(dim);
  const int n = static_cast<int>(basis.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double w = i == j ? gram(i, j) : gram(i, j) + gram(j, i);
      if (w != 0.0) out.AddTerm(basis[i] * basis[j], w);
    }
  }
  return out;
}

struct Spectrum {
  double min = 0.0;
  double norm = 0.0;
};

Spectrum SymmetricSpectrum(const MatrixXd& m) {
  if (m.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev(0), std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)))};
}

std::vector<double> Inverse(const std::vector<double>& scales) {
  std::vector<double> out(scales.size());
  for (std::size_t i = 0; i < scales.size(); ++i) out[i] = 1.0 / scales[i];
  return out;
}

std::string Hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Largest |x~^alpha| over a box given in scaled coordinates.
double MonomialSup(const Monomial& m, const Box& scaled_box) {
  double s = 1.0;
  for (int i = 0; i < m.dim(); ++i) {
    const double a = std::max(std::abs(scaled_box[i].first), std::abs(scaled_box[i].second));
    s *= std::pow(a, m[i]);
  }
  return s;
}

}  // namespace

std::string BoundCertificate::Id() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", bound);
  return Hex64(Fnv1aHash(v.ToText() + "|" + buf));
}

BoundCertificate ExtractCertificate(const SosBoundProgram& prog, const SdpSolution& sol,
                                    const ValidationTolerances& tolerances) {
  const double worst = std::max({sol.relative_gap, sol.primal_infeasibility,
                                 sol.dual_infeasibility});
  if (sol.status != SdpStatus::kConverged && !(worst <= kNearConvergedTolerance)) {
    throw CertificateUnavailable("solver returned " + std::string(ToString(sol.status)) +
                                 " (" + sol.message + ")");
  }
  if (sol.free.size() != prog.num_free() || sol.blocks.empty()) {
    throw CertificateUnavailable("solution does not match the program layout");
  }
  const int d = prog.system.dim();
  const double c = prog.objective_scale;

  BoundCertificate cert;
  cert.bound = c * sol.free(0);
  cert.aux_degree = prog.aux_degree;
  cert.system = prog.system;
  cert.phi = prog.phi;
  cert.scaling = prog.scaling;
  cert.objective_scale = c;

  Polynomial v_scaled(d);
  for (int j = 0; j < static_cast<int>(prog.v_basis.size()); ++j) {
    v_scaled.AddTerm(prog.v_basis[j], c * sol.free(1 + j));
  }
  std::vector<double> inv_scales = Inverse(prog.scaling.scales);
  std::vector<double> inv_shifts(d);
  for (int i = 0; i < d; ++i) inv_shifts[i] = -prog.scaling.shifts[i] / prog.scaling.scales[i];
  cert.v = AffineRescale(v_scaled, inv_scales, inv_shifts);

  cert.gram = c * sol.blocks[0];
  cert.gram_basis = prog.gram_basis;
  if (prog.ball) {
    cert.ball = prog.ball;
    cert.multiplier_gram = c * sol.blocks.at(1);
    cert.multiplier_basis = prog.multiplier_basis;
  }

  cert.solver.status = std::string(ToString(sol.status));
  cert.solver.iterations = sol.iterations;
  cert.solver.relative_gap = sol.relative_gap;
  cert.solver.primal_infeasibility = sol.primal_infeasibility;
  cert.solver.dual_infeasibility = sol.dual_infeasibility;
  cert.solver.primal_objective = c * sol.primal_objective;
  cert.solver.dual_objective = c * sol.dual_objective;
  cert.solver.duality_gap = c * (sol.primal_objective - sol.dual_objective);

  const ValidityReport report = ValidateCertificate(cert, tolerances);
  cert.residual_infnorm = report.residual_infnorm;
  cert.gram_min_eigenvalue = report.gram_min_eigenvalue;
  cert.gram_norm = report.gram_norm;
  cert.valid = report.valid;
  cert.tol_psd = tolerances.tol_psd;
  cert.tol_fit = tolerances.tol_fit;
  return cert;
}

Polynomial CertificateResidual(const BoundCertificate& cert) {
  const int d = cert.system.dim();
  const auto& s = cert.scaling;
  const PolySystem scaled_system = cert.system.Rescaled(s.scales, s.shifts);
  const Polynomial v_scaled = AffineRescale(cert.v, s.scales, s.shifts);
  const Polynomial phi_scaled = AffineRescale(cert.phi, s.scales, s.shifts);
  Polynomial r = Polynomial::Constant(d, cert.bound) - phi_scaled -
                 LieDerivative(scaled_system, v_scaled) -
                 GramPolynomial(cert.gram, cert.gram_basis, d);
  if (cert.ball) {
    Polynomial q = Polynomial::Constant(d, cert.ball->radius * cert.ball->radius);
    for (int i = 0; i < d; ++i) {
      Polynomial xi = Polynomial::Variable(d, i) - Polynomial::Constant(d, cert.ball->center[i]);
      q -= xi * xi;
    }
    r -= AffineRescale(q, s.scales, s.shifts) *
         GramPolynomial(cert.multiplier_gram, cert.multiplier_basis, d);
  }
  return r;
}

Polynomial BoundGap(const BoundCertificate& cert) {
  const int d = cert.system.dim();
  return Polynomial::Constant(d, cert.bound) - cert.phi - LieDerivative(cert.system, cert.v);
}

ValidityReport ValidateCertificate(const BoundCertificate& cert,
                                   const ValidationTolerances& tolerances,
                                   const std::optional<Box>& box) {
  ValidityReport report;
  if (cert.gram.rows() != static_cast<Eigen::Index>(cert.gram_basis.size()) ||
      cert.gram.cols() != cert.gram.rows()) {
    return report;
  }
  const Polynomial residual = CertificateResidual(cert);
  report.residual_infnorm = residual.MaxAbsCoefficient();

  const Spectrum gram = SymmetricSpectrum(cert.gram);
  report.gram_min_eigenvalue = gram.min;
  report.gram_norm = gram.norm;
  Spectrum mult;
  if (cert.ball) {
    mult = SymmetricSpectrum(cert.multiplier_gram);
    report.gram_min_eigenvalue = std::min(report.gram_min_eigenvalue, mult.min);
    report.gram_norm = std::max(report.gram_norm, mult.norm);
  }

  const bool psd_ok =
      report.gram_min_eigenvalue >= -tolerances.tol_psd * (1.0 + report.gram_norm);
  const bool fit_ok = std::isfinite(report.residual_infnorm) &&
                      report.residual_infnorm <= tolerances.tol_fit * (1.0 + std::abs(cert.bound));
  report.valid = psd_ok && fit_ok;

  if (box) {
    const int d = cert.system.dim();
    if (static_cast<int>(box->size()) != d) {
      throw std::invalid_argument("ValidateCertificate: box dimension mismatch");
    }
    Box scaled(d);
    for (int i = 0; i < d; ++i) {
      const double s = cert.scaling.scales[i];
      const double t = cert.scaling.shifts[i];
      scaled[i] = {((*box)[i].first - t) / s, ((*box)[i].second - t) / s};
    }
    double slack = 0.0;
    for (const auto& [m, c] : residual.terms()) slack += std::abs(c) * MonomialSup(m, scaled);
    auto basis_sq_sup = [&](const std::vector<Monomial>& basis) {
      double s = 0.0;
      for (const auto& b : basis) s += MonomialSup(b * b, scaled);
      return s;
    };
    slack += std::max(0.0, -gram.min) * basis_sq_sup(cert.gram_basis);
    if (cert.ball) {
      // Only meaningful inside the ball, where the ball polynomial is in [0, r^2].
      slack += std::max(0.0, -mult.min) * cert.ball->radius * cert.ball->radius /
               std::pow(*std::min_element(cert.scaling.scales.begin(),
                                          cert.scaling.scales.end()), 2) *
               basis_sq_sup(cert.multiplier_basis);
    }
    report.slack_bound = slack;
  }
  return report;
}

BoundResult ComputeBound(const PolySystem& system, const Polynomial& phi, int aux_degree,
                         const SosOptions& sos_options, const SdpOptions& sdp_options,
                         const ValidationTolerances& tolerances) {
  BoundResult result;
  result.program = BuildBoundProgram(system, phi, aux_degree, sos_options);
  const SdpProblem sdp = AssembleSdp(result.program);
  result.solution = SolveSdp(sdp, sdp_options);
  result.certificate = ExtractCertificate(result.program, result.solution, tolerances);
  return result;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json MonomialsToJson(const std::vector<Monomial>& basis) {
  json arr = json::array();
  for (const auto& m : basis) arr.push_back(std::vector<int>(m.exponents().begin(), m.exponents().end()));
  return arr;
}

std::vector<Monomial> MonomialsFromJson(const json& arr) {
  std::vector<Monomial> out;
  for (const auto& e : arr) out.emplace_back(e.get<std::vector<int>>());
  return out;
}

json MatrixToJson(const MatrixXd& m) {
  std::vector<double> values;
  values.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
  }
  return values;
}

MatrixXd MatrixFromJson(const json& values, int n) {
  const auto v = values.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != n * n) {
    throw std::runtime_error("certificate: Gram size does not match its basis");
  }
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i) * n + j];
  }
  return m;
}

}  // namespace

std::string CertificateToJson(const BoundCertificate& cert) {
  json j;
  j["format"] = "ergobound-certificate/1";
  j["id"] = cert.Id();
  j["bound"] = cert.bound;
  j["aux_degree"] = cert.aux_degree;
  json sys;
  sys["name"] = cert.system.name();
  sys["variables"] = cert.system.variable_names();
  sys["parameters"] = cert.system.parameters();
  json comps = json::array();
  for (const auto& c : cert.system.components()) comps.push_back(c.ToText());
  sys["components"] = comps;
  j["system"] = sys;
  j["phi"] = cert.phi.ToText();
  j["V"] = cert.v.ToText();
  j["scaling"] = {{"scales", cert.scaling.scales},
                  {"shifts", cert.scaling.shifts},
                  {"objective_scale", cert.objective_scale}};
  j["gram"] = {{"size", cert.gram_basis.size()},
               {"basis", MonomialsToJson(cert.gram_basis)},
               {"values", MatrixToJson(cert.gram)}};
  if (cert.ball) {
    j["multiplier"] = {{"center", cert.ball->center},
                       {"radius", cert.ball->radius},
                       {"size", cert.multiplier_basis.size()},
                       {"basis", MonomialsToJson(cert.multiplier_basis)},
                       {"values", MatrixToJson(cert.multiplier_gram)}};
  } else {
    j["multiplier"] = nullptr;
  }
  j["residual_infnorm"] = cert.residual_infnorm;
  j["gram_min_eigenvalue"] = cert.gram_min_eigenvalue;
  j["gram_norm"] = cert.gram_norm;
  j["valid"] = cert.valid;
  j["tolerances"] = {{"psd", cert.tol_psd}, {"fit", cert.tol_fit}};
  j["solver"] = {{"status", cert.solver.status},
                 {"iterations", cert.solver.iterations},
                 {"relative_gap", cert.solver.relative_gap},
                 {"primal_infeasibility", cert.solver.primal_infeasibility},
                 {"dual_infeasibility", cert.solver.dual_infeasibility},
                 {"primal_objective", cert.solver.primal_objective},
                 {"dual_objective", cert.solver.dual_objective},
                 {"duality_gap", cert.solver.duality_gap}};
  return j.dump(2) + "\n";
}

BoundCertificate CertificateFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("certificate: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "ergobound-certificate/1") {
      throw std::runtime_error("certificate: unknown format tag");
    }
    BoundCertificate cert;
    cert.bound = j.at("bound").get<double>();
    cert.aux_degree = j.at("aux_degree").get<int>();
    const json& sys = j.at("system");
    std::vector<Polynomial> comps;
    for (const auto& c : sys.at("components")) comps.push_back(Polynomial::FromText(c.get<std::string>()));
    cert.system = PolySystem(std::move(comps), sys.at("variables").get<std::vector<std::string>>(),
                             sys.at("parameters").get<std::map<std::string, double>>(),
                             sys.at("name").get<std::string>());
    cert.phi = Polynomial::FromText(j.at("phi").get<std::string>());
    cert.v = Polynomial::FromText(j.at("V").get<std::string>());
    const json& sc = j.at("scaling");
    cert.scaling.scales = sc.at("scales").get<std::vector<double>>();
    cert.scaling.shifts = sc.at("shifts").get<std::vector<double>>();
    cert.objective_scale = sc.at("objective_scale").get<double>();
    const json& g = j.at("gram");
    cert.gram_basis = MonomialsFromJson(g.at("basis"));
    cert.gram = MatrixFromJson(g.at("values"), static_cast<int>(cert.gram_basis.size()));
    if (const json& mj = j.at("multiplier"); !mj.is_null()) {
      cert.ball = BallConstraint{mj.at("center").get<std::vector<double>>(),
                                 mj.at("radius").get<double>()};
      cert.multiplier_basis = MonomialsFromJson(mj.at("basis"));
      cert.multiplier_gram =
          MatrixFromJson(mj.at("values"), static_cast<int>(cert.multiplier_basis.size()));
    }
    cert.residual_infnorm = j.at("residual_infnorm").get<double>();
    cert.gram_min_eigenvalue = j.at("gram_min_eigenvalue").get<double>();
    cert.gram_norm = j.value("gram_norm", 0.0);
    cert.valid = j.at("valid").get<bool>();
    cert.tol_psd = j.at("tolerances").at("psd").get<double>();
    cert.tol_fit = j.at("tolerances").at("fit").get<double>();
    const json& s = j.at("solver");
    cert.solver.status = s.at("status").get<std::string>();
    cert.solver.iterations = s.at("iterations").get<int>();
    cert.solver.relative_gap = s.at("relative_gap").get<double>();
    cert.solver.primal_infeasibility = s.at("primal_infeasibility").get<double>();
    cert.solver.dual_infeasibility = s.at("dual_infeasibility").get<double>();
    cert.solver.primal_objective = s.at("primal_objective").get<double>();
    cert.solver.dual_objective = s.at("dual_objective").get<double>();
    cert.solver.duality_gap = s.at("duality_gap").get<double>();
    if (cert.system.dim() != cert.v.dim() || cert.system.dim() != cert.phi.dim()) {
      throw std::runtime_error("certificate: dimension mismatch");
    }
    return cert;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("certificate: ") + e.what());
  }
}

}  // namespace ergobound
