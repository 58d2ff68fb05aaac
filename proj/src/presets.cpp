#include "hyperboloidal/presets.hpp"

#include <algorithm>
#include <cmath>

#include "hyperboloidal/tensor_ops.hpp"

namespace hyp {

namespace {

bool known(const std::vector<std::string>& list, const std::string& s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

Matrix3d outer(const Vector3d& a) { return a * a.transpose(); }

}  // namespace

const std::vector<std::string>& metric_presets() {
  static const std::vector<std::string> v{"hyperbolic", "perturbed", "weak-lipschitz"};
  return v;
}
const std::vector<std::string>& nu_presets() {
  static const std::vector<std::string> v{"none", "decaying", "weak"};
  return v;
}
const std::vector<std::string>& matter_presets() {
  static const std::vector<std::string> v{"none", "maxwell-fluid"};
  return v;
}

void validate_preset(const PresetParams& p, GridMode mode) {
  if (!known(metric_presets(), p.metric)) throw DomainError("unknown metric preset '" + p.metric + "'");
  if (!known(nu_presets(), p.nu)) throw DomainError("unknown nu preset '" + p.nu + "'");
  if (!known(matter_presets(), p.matter)) throw DomainError("unknown matter preset '" + p.matter + "'");
  for (double v : {p.metric_epsilon, p.metric_anisotropy, p.nu_amplitude, p.e_amplitude, p.b_amplitude, p.j_amplitude,
                   p.zeta_amplitude, p.theta_amplitude, p.phi_star_epsilon})
    if (!std::isfinite(v)) throw DomainError("preset amplitudes must be finite");
  if (p.zeta_amplitude < 0.0) throw DomainError("ζ amplitude must be non-negative");
  if (p.theta_amplitude <= -2.0 || p.theta_amplitude >= 1.0) throw DomainError("θ amplitude must lie in (-2, 1) so that θ > 0");
  if (p.phi_star_epsilon < 0.0) throw DomainError("φ* amplitude must be non-negative");
  if (mode == GridMode::radial1d && p.metric == "perturbed" && p.metric_anisotropy != 0.0)
    throw DomainError("the anisotropic metric term is not rotation invariant; radial mode needs anisotropy = 0");
  if (p.metric != "hyperbolic" && std::abs(p.metric_epsilon) >= 1.0)
    throw DomainError("metric perturbation amplitude must be below 1");
}

Metric preset_metric(const GridPtr& grid, const PresetParams& p) {
  const double eps = p.metric_epsilon, an = p.metric_anisotropy;
  const std::string name = p.metric;
  SymTensor2Field bar = sample_tensor(grid, [&](const Vector3d& x) {
    const double rho = DefiningFunction::value(x);
    Matrix3d m = Matrix3d::Identity();
    if (name == "perturbed") {
      const Vector3d v(1.0 + x[1], x[2], 0.0);
      m += eps * rho * rho * (outer(x) + an * outer(v));
    } else if (name == "weak-lipschitz") {
      m += eps * rho * outer(x);
    }
    return m;
  });
  return Metric(bar, Frame::physical);
}

FreeData make_free_data(const GridPtr& grid, const PresetParams& p) {
  validate_preset(p, grid->mode());
  const Metric lambda = preset_metric(grid, p);
  const Metric lbar = lambda.as_compactified();
  SymTensor2Field nu(grid);
  if (p.nu != "none") {
    const bool decaying = p.nu == "decaying";
    nu = sample_tensor(grid, [&](const Vector3d& x) {
      return Matrix3d(p.nu_amplitude * (decaying ? DefiningFunction::value(x) : 1.0) * outer(x));
    });
    nu = trace_free_part(lbar, nu);
  }
  MatterFields m = MatterFields::zero(grid);
  if (p.matter == "maxwell-fluid") {
    const bool ball = grid->mode() == GridMode::ball3d;
    m.e = sample_vector(grid, [&](const Vector3d& x) {
      const double rho = DefiningFunction::value(x);
      const Vector3d rot = ball ? Vector3d(-x[1], x[0], 0.0) : Vector3d::Zero();
      return Vector3d(p.e_amplitude * rho * rho * (x + rot));
    });
    m.b = sample_vector(grid, [&](const Vector3d& x) {
      const double rho = DefiningFunction::value(x);
      const Vector3d rot = ball ? Vector3d(0.0, -x[2], x[1]) : Vector3d::Zero();
      return Vector3d(p.b_amplitude * rho * rho * (x + rot));
    });
    m.j = sample_vector(grid, [&](const Vector3d& x) {
      const double rho = DefiningFunction::value(x);
      return Vector3d(p.j_amplitude * rho * rho * rho * x);
    });
    m.zeta = sample_scalar(grid, [&](const Vector3d& x) {
      const double rho = DefiningFunction::value(x);
      return p.zeta_amplitude * rho * rho;
    });
  }
  return FreeData{lambda, nu, m};
}

ScalarField preset_theta(const GridPtr& grid, double amplitude) {
  return sample_scalar(grid, [amplitude](const Vector3d& x) { return 1.0 + amplitude * DefiningFunction::value(x); });
}

}  // namespace hyp
