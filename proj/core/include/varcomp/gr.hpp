#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "varcomp/jet_spec.hpp"
#include "varcomp/numjet.hpp"
#include "varcomp/report.hpp"

namespace varcomp::gr {

/// Charts used by the fixtures: base x0..x{n-1}; `metric_spec` has the field
/// g[n,n] sym, `em_spec` has A[n] (contravariant, or covariant for the
/// divergence demo) followed by g[n,n] sym.
std::shared_ptr<const JetSpec> metric_spec(int n, int order = 2);
std::shared_ptr<const JetSpec> em_spec(int n, int order = 1);

std::shared_ptr<const JetLayout> metric_layout(int n, int order);
std::shared_ptr<const JetLayout> em_layout(int n, int order);

/// Position of g_{jk} (any order of j, k) among the n(n+1)/2 metric components.
int sym_index(int j, int k, int n);
int metric_components(int n);

/// η = diag(1, −1, ..., −1).
double eta(int i, int j);

struct MetricSampleOptions {
  double perturbation = 0.2;  // δ_{jk} uniform in [−p, p]
  double derivative = 0.5;    // derivatives uniform in [−d, d]
};

/// g = η + δ with random derivatives up to `order`; resampled until
/// |det g| > 1e−6. Deterministic per seed.
JetPoint sample_metric_jet(std::uint64_t seed, int n, int order, const MetricSampleOptions& opts = {});

struct EmSampleOptions {
  bool flat = true;       // g = η with vanishing derivatives
  bool on_shell = true;   // flat only: second derivatives of A projected onto ∂_i F^{ij} = 0
  double potential = 1.0;
  double derivative = 0.5;
};

JetPoint sample_em_jet(std::uint64_t seed, int n, int order, const EmSampleOptions& opts = {});

/// Flat-metric Maxwell divergence M^j = ∂_i F^{ij} from A's second derivatives.
std::vector<double> maxwell_divergence(const JetPoint& p, int n);
/// Shifts A^j_{,ii} (one i per j) so that the flat Maxwell divergence vanishes.
void project_on_shell(JetPoint& p, int n);

// ---------------------------------------------------------------- geometry
// Tensors are row-major: Γ^i_{jk} at (i*n + j)*n + k, R^i_{jkl} at
// ((i*n + j)*n + k)*n + l, two-index objects at i*n + j.

/// Throws SingularMetric when |det g| / max|g_ij|^n < 1e−9.
std::vector<double> christoffel(const JetPoint& p, int n, int metric_offset = 0);

struct Curvature {
  std::vector<double> riemann;
  std::vector<double> ricci;
  std::vector<double> ricci_up;
  double scalar = 0.0;
  double sqrt_abs_det = 0.0;
};

Curvature curvature(const JetPoint& p, int n, int metric_offset = 0);

std::vector<double> inverse_metric(const JetPoint& p, int n, int metric_offset = 0);
double sqrt_abs_det(const JetPoint& p, int n, int metric_offset = 0);

/// α R^{ij} √|g|
std::vector<double> ricci_source_tensor(const JetPoint& p, int n, double alpha);
/// (1/16πκ)(R^{ij} − ½ R g^{ij}) √|g|
std::vector<double> einstein_tensor_density(const JetPoint& p, int n, double kappa = 1.0);
/// −(1/16πκ) R √|g|
double hilbert_value(const JetPoint& p, int n, double kappa = 1.0);

/// Source-form components over the metric components: ε_(jj) = T^{jj},
/// ε_(jk) = T^{jk} + T^{kj} for j < k, so that Σ g_(jk) ε_(jk) = g_ij T^{ij}.
std::vector<double> to_source_components(const std::vector<double>& tensor, int n);
/// T^{jk} = −(2/√|g|) δL/δg_{jk} from Euler-Lagrange values over the metric components.
std::vector<double> hilbert_tensor_from_el(const std::vector<double>& el, int n, double sqrt_abs_det);

DensityFn hilbert_density(int n, double kappa = 1.0);
DensityFn ricci_source_density(int n, double alpha);
DensityFn einstein_density(int n, double kappa = 1.0);

// ---------------------------------------------------------------- electromagnetism
// Points live on em_layout: A components first, then the metric.

/// T̃^{ij} = (−(1/4π) g^{ih} A^l_{;h} F^j_l + (1/16π) g^{ij} F_{kl}F^{kl}) √|g| with
/// F_{ij} = g_{jk}A^k_{;i} − g_{ik}A^k_{;j}.
std::vector<double> em_noether_tensor(const JetPoint& p, int n);
/// The same current written with covariant components A_i as field variables.
std::vector<double> em_covariant_noether_tensor(const JetPoint& p, int n);
/// F_{kl}F^{kl}
double em_field_invariant(const JetPoint& p, int n);
/// (α/16π) F^{kl}F_{kl} √|g|
double em_vt_closed_form(const JetPoint& p, int n, double alpha);
/// −α(−(1/4π) F^{il}F^j_l + (1/16π) g^{ij} F_{kl}F^{kl})
std::vector<double> em_hilbert_tensor(const JetPoint& p, int n, double alpha);

struct EmSymmetrized {
  std::vector<double> noether;  // T̃
  std::vector<double> tensor;   // T = −α(T̃ + (1/4π) A^i_{,l} F^{jl})
  std::vector<double> correction;  // τ = T − T̃
};
EmSymmetrized em_symmetrized_tensor(const JetPoint& p, int n, double alpha);

/// α T̃ as a source form on em_spec (zero on the A components).
DensityFn em_source_density(int n, double alpha);
DensityFn em_covariant_source_density(int n, double alpha);

std::vector<int> em_metric_component_ids(int n);

/// Hilbert tensor of the metric-scaled VT Lagrangian of α T̃, by quadrature
/// and nested finite differences. Needs a point of order 2.
std::vector<double> em_pipeline_tensor(const JetPoint& p, int n, double alpha, const NestedFdOptions& fd = {},
                                       const QuadratureOptions& quad = {});

/// VT Lagrangian of the covariant-potential current; throws NonFiniteIntegrand
/// unless the integrand vanishes identically.
double covariant_potential_vt(const JetPoint& p, int n, double alpha, const QuadratureOptions& quad = {});

// ---------------------------------------------------------------- scenarios

struct CheckConfig {
  double tolerance = 0.0;
  int points = 0;
};

struct Scenario {
  std::uint64_t seed = 42;
  int dimension = 4;
  int points = 100;
  double kappa = 1.0;
  std::map<std::string, CheckConfig> checks;  // overrides of the defaults
};

/// Check names in run order.
std::vector<std::string> check_names();
CheckConfig default_check(const std::string& name, const Scenario& s);

/// Runs every named check; checks that do not apply to the dimension are skipped.
std::vector<NumericCheck> run_scenario(const Scenario& s);

}  // namespace varcomp::gr
