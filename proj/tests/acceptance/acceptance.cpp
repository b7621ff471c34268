// Acceptance suite: one line per criterion, exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "varcomp/calculus.hpp"
#include "varcomp/cli.hpp"
#include "varcomp/errors.hpp"
#include "varcomp/gr.hpp"
#include "varcomp/numjet.hpp"
#include "varcomp/parser.hpp"
#include "varcomp/variational.hpp"

namespace {

using namespace varcomp;
using std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds
  std::function<Outcome()> body;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Outcome& require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
  }
  return o;
}

void note(Outcome& o, const std::string& text) { o.detail += (o.detail.empty() ? "" : "; ") + text; }

int run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

/// Numeric E(λ_ε) − ε at random points, against the symbolic completion.
double numeric_completion_residual(const SourceForm& eps, const SourceForm& tau, int points, std::uint64_t seed) {
  const int r = eps.spec->max_order();
  std::vector<int> comps;
  for (int c = 0; c < eps.spec->component_count(); ++c) comps.push_back(c);
  DensityFn source = density_from_exprs(eps.spec, eps.components);
  source.order = eps.order();
  DensityFn L = vt_lagrangian_density(source, comps);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const JetPoint p = testing::random_point(*eps.spec, 2 * r, rng, eps.components);
    const auto el = numeric_euler_lagrange(L, p, NestedFdOptions{1e-2, true});
    for (std::size_t c = 0; c < el.size(); ++c) {
      const double want = testing::evaluate(tau.components[c], p);
      const double got = el[c] - testing::evaluate(eps.components[c], p);
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------- mechanics

Outcome damped_oscillator() {
  Outcome o;
  const ProblemFile pf = testing::load_problem("damped.vc");
  const JetSpec& spec = *pf.spec;
  const Lagrangian vt = vt_lagrangian(*pf.source, pf.scaled_fields);
  const Expr expected_vt = parse_expression(
      "(1/2)*(m[s,v]*D2(q[v])*q[s] + k[s,v]*q[s]*q[v]) + (1/2)*q[s]*a[s,v]*D1(q[v])", spec);
  require(o, vt.density == expected_vt, "L_eps");
  const Lagrangian reduced = reduce_order(vt);
  const Expr expected_reduced = parse_expression(
      "(1/2)*(-m[s,v]*D1(q[v])*D1(q[s]) + k[s,v]*q[s]*q[v]) + (1/2)*q[s]*a[s,v]*D1(q[v])", spec);
  require(o, reduced.density == expected_reduced, "reduced Lagrangian");
  const SourceForm tau = canonical_completion(*pf.source, pf.scaled_fields);
  const SourceForm completed = *pf.source + tau;
  for (int r = 0; r < 2; ++r) {
    const std::string rho = std::to_string(r + 1);
    const auto k = static_cast<std::size_t>(r);
    require(o, tau.components[k] == parse_expression("-a[" + rho + ",v]*D1(q[v])", spec), "tau_" + rho);
    require(o, completed.components[k] == parse_expression("m[" + rho + ",v]*D2(q[v]) + k[" + rho + ",v]*q[v]", spec),
            "completed_" + rho);
  }
  require(o, euler_lagrange(reduced) == completed, "E(reduced) = completed");
  note(o, "L_eps, reduced Lagrangian, tau and completed system equal structurally");
  return o;
}

Outcome cubic_friction() {
  Outcome o;
  const ProblemFile pf = testing::load_problem("cubic_friction.vc");
  const JetSpec& spec = *pf.spec;
  const int p = 3;
  const Expr F = parse_expression("c[s,v,w]*D1(q[s])*D1(q[v])*D1(q[w])", spec);
  const SourceForm tau = canonical_completion(*pf.source);
  auto qd = [](int c) { return Symbol::jet(c, MultiIndex({0})); };
  for (int rho = 0; rho < 2; ++rho) {
    const Expr dF = partial(F, qd(rho), spec);
    Expr expected = dF.scaled(Rational(2 - p, p) - 1);
    for (int nu = 0; nu < 2; ++nu) {
      for (int sg = 0; sg < 2; ++sg) {
        expected -= (partial(partial(dF, qd(nu), spec), qd(sg), spec) * spec.coord(nu, MultiIndex({0, 0})) *
                     spec.coord(sg))
                        .scaled(Rational(1, p));
      }
    }
    require(o, tau.components[static_cast<std::size_t>(rho)] == expected, "structural tau_" + std::to_string(rho + 1));
  }
  const double residual = numeric_completion_residual(*pf.source, tau, 20, 42);
  require(o, residual <= 1e-6, "numeric oracle");
  note(o, "structural match; numeric oracle max rel residual " + fmt(residual) + " (tol 1e-6, 20 points)");
  return o;
}

Outcome free_oscillations() {
  Outcome o;
  const std::string path = testing::data_path("problems/free_oscillations.vc");
  std::ostringstream out, err;
  const int code = cli::run({"check", path}, out, err);
  require(o, code == cli::kOk && out.str().find("verdict: variational") != std::string::npos, "check verdict");
  const ProblemFile pf = testing::load_problem("free_oscillations.vc");
  require(o, euler_lagrange(vt_lagrangian(*pf.source)) == *pf.source, "E(lambda_eps) = eps");
  require(o, canonical_completion(*pf.source).is_zero(), "tau = 0");
  note(o, "check exits 0 with a variational verdict; E(lambda_eps) = eps structurally");
  return o;
}

// ---------------------------------------------------------------- gravitation

double alpha_of(double kappa) { return -1.0 / (16.0 * pi * kappa); }

std::vector<int> all_metric_components(int n) {
  std::vector<int> c;
  for (int k = 0; k < gr::metric_components(n); ++k) c.push_back(k);
  return c;
}

Outcome hilbert_identity() {
  Outcome o;
  const int n = 4;
  const double alpha = alpha_of(1.0);
  const DensityFn eps = gr::ricci_source_density(n, alpha);
  const auto comps = all_metric_components(n);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const JetPoint p = gr::sample_metric_jet(1000 + static_cast<std::uint64_t>(k), n, 2);
    const gr::Curvature c = gr::curvature(p, n);
    const double want = alpha * c.scalar * c.sqrt_abs_det;
    const double got = numeric_vt_lagrangian(eps, p, comps);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  require(o, worst <= 1e-10, "Hilbert identity");
  note(o, "max rel residual " + fmt(worst) + " (tol 1e-10, 100 jets)");
  return o;
}

double norm_relative(const std::vector<double>& got, const std::vector<double>& want) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    diff = std::max(diff, std::abs(got[k] - want[k]));
    scale = std::max(scale, std::abs(want[k]));
  }
  return diff / std::max(scale, 1e-300);
}

Outcome einstein_as_euler_lagrange() {
  Outcome o;
  const int n = 4;
  const DensityFn L = gr::hilbert_density(n);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const JetPoint p = gr::sample_metric_jet(2000 + static_cast<std::uint64_t>(k), n, 4);
    const auto el = numeric_euler_lagrange(L, p);
    const auto einstein = gr::to_source_components(gr::einstein_tensor_density(p, n), n);
    worst = std::max(worst, norm_relative(el, einstein));
  }
  require(o, worst <= 1e-3, "Einstein tensor as Euler-Lagrange form");

  const double alpha = alpha_of(1.0);
  const auto comps = all_metric_components(n);
  double proportionality = 0.0;
  for (int k = 0; k < 3; ++k) {
    const JetPoint p = gr::sample_metric_jet(2100 + static_cast<std::uint64_t>(k), n, 4);
    const auto a = numeric_euler_lagrange(vt_lagrangian_density(gr::ricci_source_density(n, alpha), comps), p);
    auto b = numeric_euler_lagrange(vt_lagrangian_density(gr::ricci_source_density(n, 3 * alpha), comps), p);
    for (double& v : b) v /= 3.0;
    proportionality = std::max(proportionality, norm_relative(b, a));
  }
  require(o, proportionality <= 1e-5, "alpha proportionality");
  note(o, "EL vs Einstein max rel residual " + fmt(worst) + " (tol 1e-3, 20 jets); E(3a)/3 vs E(a) " +
              fmt(proportionality) + " (tol 1e-5, 3 jets)");
  return o;
}

Outcome helmholtz_witness() {
  Outcome o;
  const int n = 4;
  const DensityFn einstein = gr::einstein_density(n);
  const DensityFn ricci = gr::ricci_source_density(n, alpha_of(1.0));
  double worst_einstein = 0.0;
  double least_ricci = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    const JetPoint p = gr::sample_metric_jet(3000 + static_cast<std::uint64_t>(k), n, 4);
    worst_einstein = std::max(worst_einstein, numeric_helmholtz(einstein, p, 2).max_abs);
    least_ricci = std::min(least_ricci, numeric_helmholtz(ricci, p, 2).max_abs);
  }
  require(o, worst_einstein < 1e-4, "Einstein Helmholtz residual");
  require(o, least_ricci > 1e-2, "Ricci Helmholtz witness");
  note(o, "Einstein max|H| " + fmt(worst_einstein) + " (< 1e-4); Ricci min max|H| " + fmt(least_ricci) +
              " (> 1e-2); same 2 jets");
  return o;
}

// ---------------------------------------------------------------- electromagnetism

/// On a flat jet: T̃^{ij} + (1/4π) A^i_{,l} F^{jl}, built from η and A's first derivatives.
std::vector<double> flat_symmetrized_oracle(const JetPoint& p, int n) {
  const auto& L = p.layout();
  auto dA = [&](int k, int i) { return p[L.slot(k, MultiIndex({i}))]; };
  auto eta = [](int i, int j) { return gr::eta(i, j); };
  std::vector<double> F(static_cast<std::size_t>(n * n));  // F_{ij} = η_{jk}A^k_{,i} − η_{ik}A^k_{,j}
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) F[static_cast<std::size_t>(i * n + j)] = eta(j, j) * dA(j, i) - eta(i, i) * dA(i, j);
  auto Fdn = [&](int i, int j) { return F[static_cast<std::size_t>(i * n + j)]; };
  auto Fmixed = [&](int j, int l) { return eta(j, j) * Fdn(j, l); };          // F^j_l
  auto Fup = [&](int j, int l) { return eta(j, j) * eta(l, l) * Fdn(j, l); };  // F^{jl}
  double inv = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) inv += Fdn(k, l) * Fup(k, l);
  std::vector<double> T(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double noether = eta(i, j) * inv / (16 * pi);
      double extra = 0.0;
      for (int l = 0; l < n; ++l) {
        noether -= eta(i, i) * dA(l, i) * Fmixed(j, l) / (4 * pi);
        extra += dA(i, l) * Fup(j, l) / (4 * pi);
      }
      T[static_cast<std::size_t>(i * n + j)] = noether + extra;
    }
  return T;
}

/// (α/16π) F^{kl}F_{kl} √|g| on a curved jet, with F_{ij} = ∂_i(g_{jk}A^k) − ∂_j(g_{ik}A^k).
double curved_vt_oracle(const JetPoint& p, int n, double alpha) {
  const auto& L = p.layout();
  auto A = [&](int k) { return p[L.slot(k, MultiIndex{})]; };
  auto dA = [&](int k, int i) { return p[L.slot(k, MultiIndex({i}))]; };
  auto g = [&](int j, int k) { return p[L.slot(n + gr::sym_index(j, k, n), MultiIndex{})]; };
  auto dg = [&](int j, int k, int i) { return p[L.slot(n + gr::sym_index(j, k, n), MultiIndex({i}))]; };
  auto d_lower = [&](int j, int i) {  // ∂_i (g_{jk} A^k)
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += dg(j, k, i) * A(k) + g(j, k) * dA(k, i);
    return s;
  };
  const auto ginv = gr::inverse_metric(p, n, n);
  auto gi = [&](int a, int b) { return ginv[static_cast<std::size_t>(a * n + b)]; };
  double inv = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double Fab = d_lower(b, a) - d_lower(a, b);
          const double Fkl = d_lower(l, k) - d_lower(k, l);
          inv += gi(a, k) * gi(b, l) * Fab * Fkl;
        }
  return alpha / (16 * pi) * inv * gr::sqrt_abs_det(p, n, n);
}

Outcome em_symmetrization() {
  Outcome o;
  const int n = 4;
  double worst = 0.0, asym_oracle = 0.0, asym_pipeline = 0.0;
  for (int k = 0; k < 50; ++k) {
    const JetPoint p = gr::sample_em_jet(4000 + static_cast<std::uint64_t>(k), n, 2);
    const auto got = gr::em_pipeline_tensor(p, n, -1.0);
    const auto want = flat_symmetrized_oracle(p, n);
    double diff = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      diff = std::max(diff, std::abs(got[i] - want[i]));
      scale = std::max(scale, std::abs(want[i]));
    }
    worst = std::max(worst, diff / scale);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto ij = static_cast<std::size_t>(i * n + j), ji = static_cast<std::size_t>(j * n + i);
        asym_oracle = std::max(asym_oracle, std::abs(want[ij] - want[ji]));
        asym_pipeline = std::max(asym_pipeline, std::abs(got[ij] - got[ji]));
      }
  }
  require(o, worst <= 1e-3, "pipeline vs symmetrized current");
  require(o, asym_oracle <= 1e-10 && asym_pipeline <= 1e-10, "symmetry");

  const DensityFn eps = gr::em_source_density(n, -1.0);
  const auto comps = gr::em_metric_component_ids(n);
  double worst_vt = 0.0;
  gr::EmSampleOptions curved;
  curved.flat = false;
  for (int k = 0; k < 50; ++k) {
    const JetPoint p = gr::sample_em_jet(4100 + static_cast<std::uint64_t>(k), n, 1, curved);
    const double want = curved_vt_oracle(p, n, -1.0);
    const double got = numeric_vt_lagrangian(eps, p, comps);
    worst_vt = std::max(worst_vt, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  require(o, worst_vt <= 1e-10, "VT density");
  note(o, "pipeline rel residual " + fmt(worst) + " (tol 1e-3, 50 flat jets); asymmetry " +
              fmt(std::max(asym_oracle, asym_pipeline)) + " (tol 1e-10); VT density " + fmt(worst_vt) +
              " (tol 1e-10, 50 curved jets)");
  return o;
}

Outcome covariant_divergence() {
  Outcome o;
  const int n = 4;
  gr::EmSampleOptions curved;
  curved.flat = false;
  int detected = 0;
  const int jets = 20;
  for (int k = 0; k < jets; ++k) {
    const JetPoint p = gr::sample_em_jet(5000 + static_cast<std::uint64_t>(k), n, 1, curved);
    try {
      gr::covariant_potential_vt(p, n, -1.0);
    } catch (const DivergentHomotopy& e) {
      if (e.weight() <= -1.0 + 0.25) ++detected;
    }
  }
  require(o, detected == jets, "numeric divergence detection");
  const int code = run_cli({"complete", testing::data_path("problems/em_covariant.vc")});
  require(o, code == cli::kDivergent, "CLI exit 4");
  note(o, std::to_string(detected) + "/" + std::to_string(jets) + " jets diverge; CLI complete exits " +
              std::to_string(code));
  return o;
}

// ---------------------------------------------------------------- properties

Outcome property_suites() {
  Outcome o;
  std::mt19937_64 rng(9001);
  int helmholtz_fail = 0, completion_fail = 0;
  double el_worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto problem = testing::random_lagrangian(rng);
    const Lagrangian l{problem.spec, problem.expr};
    const SourceForm e = euler_lagrange(l);
    if (!helmholtz(e).all_zero()) ++helmholtz_fail;
    if (!canonical_completion(e).is_zero()) ++completion_fail;
    const int r = problem.spec->max_order();
    DensityFn L = density_from_exprs(problem.spec, {problem.expr});
    L.order = r;
    for (int j = 0; j < 20; ++j) {
      const JetPoint p = testing::random_point(*problem.spec, 2 * r, rng, {problem.expr});
      const auto numeric = numeric_euler_lagrange(L, p);
      for (std::size_t c = 0; c < numeric.size(); ++c) {
        const double want = testing::evaluate(e.components[c], p);
        el_worst = std::max(el_worst, std::abs(numeric[c] - want) / std::max(1.0, std::abs(want)));
      }
    }
  }
  require(o, helmholtz_fail == 0, "(a) H(E(L)) = 0");
  require(o, completion_fail == 0, "(a) tau(E(L)) = 0");
  require(o, el_worst <= 1e-4, "(b) numeric EL");

  int forms = 0, route_fail = 0, completed_fail = 0;
  while (forms < 100) {
    const SourceForm e = testing::random_source_form(rng);
    if (helmholtz(e).all_zero()) continue;
    ++forms;
    const SourceForm tau = canonical_completion(e);
    if (!(tau == completion_via_helmholtz(e))) ++route_fail;
    if (!helmholtz(e + tau).all_zero()) ++completed_fail;
  }
  require(o, route_fail == 0, "(c) completion routes agree");
  require(o, completed_fail == 0, "(d) H(eps + tau) = 0");
  note(o, "(a) 200 Lagrangians exact; (b) numeric EL max rel residual " + fmt(el_worst) +
              " (tol 1e-4, 20 points each); (c,d) 100 non-variational forms exact");
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "damped oscillator completion", 1.0, damped_oscillator},
      {2, "cubic friction completion", 60.0, cubic_friction},
      {3, "free oscillations are variational", 60.0, free_oscillations},
      {4, "Hilbert identity", 30.0, hilbert_identity},
      {5, "Einstein tensor as Euler-Lagrange form", 300.0, einstein_as_euler_lagrange},
      {6, "Helmholtz witness", 300.0, helmholtz_witness},
      {7, "electromagnetic symmetrization", 300.0, em_symmetrization},
      {8, "divergent homotopy detection", 60.0, covariant_divergence},
      {9, "property suites", 120.0, property_suites},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.time_limit) {
      o.pass = false;
      note(o, "FAILED time limit " + fmt(c.time_limit) + " s");
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %s: %s (%.2f s) %s\n", c.id, c.title.c_str(), o.pass ? "PASS" : "FAIL", seconds,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
