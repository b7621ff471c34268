#include "varcomp/gr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>

#include "varcomp/errors.hpp"

namespace varcomp::gr {

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const JetSpec> make_spec(int n, int order, bool with_potential) {
  if (n < 1) throw Error("dimension must be positive");
  auto spec = std::make_shared<JetSpec>();
  for (int i = 0; i < n; ++i) spec->add_base("x" + std::to_string(i));
  if (with_potential) spec->add_field("A", {n});
  spec->add_field("g", {n, n}, true);
  spec->set_max_order(order);
  return spec;
}

std::shared_ptr<const JetLayout> cached_layout(int n, int components, int order) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, components, order}];
  if (!slot) slot = std::make_shared<const JetLayout>(n, components, order);
  return slot;
}

/// Metric values with derivatives: dg[(l*n + j)*n + k] = g_{jk,l},
/// ddg[((l*n + m)*n + j)*n + k] = g_{jk,lm}.
struct MetricJet {
  int n = 0;
  std::vector<double> g, dg, ddg;
};

MetricJet read_metric(const JetPoint& p, int n, int offset, int level) {
  const auto& layout = p.layout();
  MetricJet m;
  m.n = n;
  m.g.assign(static_cast<std::size_t>(n * n), 0.0);
  if (level >= 1) m.dg.assign(static_cast<std::size_t>(n * n * n), 0.0);
  if (level >= 2) m.ddg.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      const int c = offset + sym_index(j, k, n);
      const double v = p[layout.slot(c, MultiIndex{})];
      m.g[static_cast<std::size_t>(j * n + k)] = m.g[static_cast<std::size_t>(k * n + j)] = v;
      if (level < 1) continue;
      for (int l = 0; l < n; ++l) {
        const double d = p[layout.slot(c, MultiIndex({l}))];
        m.dg[static_cast<std::size_t>((l * n + j) * n + k)] = m.dg[static_cast<std::size_t>((l * n + k) * n + j)] = d;
        if (level < 2) continue;
        for (int q = l; q < n; ++q) {
          const double dd = p[layout.slot(c, MultiIndex({l, q}))];
          for (auto [a, b] : {std::pair{l, q}, std::pair{q, l}}) {
            m.ddg[static_cast<std::size_t>(((a * n + b) * n + j) * n + k)] = dd;
            m.ddg[static_cast<std::size_t>(((a * n + b) * n + k) * n + j)] = dd;
          }
        }
      }
    }
  }
  return m;
}

struct Geometry {
  int n = 0;
  std::vector<double> g, ginv;
  double det = 0.0;
  double sqrt_det = 0.0;
  std::vector<double> gamma;   // Γ^i_{jk}
  std::vector<double> dgamma;  // ∂_l Γ^i_{jk} at ((l*n + i)*n + j)*n + k
};

void invert(Geometry& geo) {
  const int n = geo.n;
  Eigen::MatrixXd g(n, n);
  double scale = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      g(j, k) = geo.g[static_cast<std::size_t>(j * n + k)];
      scale = std::max(scale, std::abs(g(j, k)));
    }
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw SingularMetric("metric is zero or not finite");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  geo.det = lu.determinant();
  if (std::abs(geo.det) / std::pow(scale, n) < 1e-9) throw SingularMetric("metric is singular (det g = 0)");
  const Eigen::MatrixXd inv = lu.inverse();
  geo.ginv.resize(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) geo.ginv[static_cast<std::size_t>(j * n + k)] = inv(j, k);
  }
  geo.sqrt_det = std::sqrt(std::abs(geo.det));
}

/// level 0: inverse and determinant; 1: Christoffel symbols; 2: their derivatives.
Geometry geometry(const JetPoint& p, int n, int offset, int level) {
  const MetricJet m = read_metric(p, n, offset, level);
  Geometry geo;
  geo.n = n;
  geo.g = m.g;
  invert(geo);
  if (level < 1) return geo;
  const auto N = static_cast<std::size_t>(n);
  auto G = [&](int a, int b) { return geo.ginv[static_cast<std::size_t>(a * n + b)]; };
  auto dG = [&](int l, int j, int k) { return m.dg[static_cast<std::size_t>((l * n + j) * n + k)]; };
  // Γ_{h jk} = ½(g_{hj,k} + g_{hk,j} − g_{jk,h})
  std::vector<double> lower(N * N * N);
  for (int h = 0; h < n; ++h) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        lower[static_cast<std::size_t>((h * n + j) * n + k)] = 0.5 * (dG(k, h, j) + dG(j, h, k) - dG(h, j, k));
      }
    }
  }
  geo.gamma.assign(N * N * N, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int h = 0; h < n; ++h) s += G(i, h) * lower[static_cast<std::size_t>((h * n + j) * n + k)];
        geo.gamma[static_cast<std::size_t>((i * n + j) * n + k)] = s;
      }
    }
  }
  if (level < 2) return geo;
  auto ddG = [&](int l, int q, int j, int k) { return m.ddg[static_cast<std::size_t>(((l * n + q) * n + j) * n + k)]; };
  // ∂_l g^{ih} = −g^{ia} g_{ab,l} g^{bh}
  std::vector<double> dinv(N * N * N, 0.0);
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < n; ++h) {
        double s = 0.0;
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) s -= G(i, a) * dG(l, a, b) * G(b, h);
        }
        dinv[static_cast<std::size_t>((l * n + i) * n + h)] = s;
      }
    }
  }
  geo.dgamma.assign(N * N * N * N, 0.0);
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int h = 0; h < n; ++h) {
            const double dlow = 0.5 * (ddG(k, l, h, j) + ddG(j, l, h, k) - ddG(h, l, j, k));
            s += dinv[static_cast<std::size_t>((l * n + i) * n + h)] * lower[static_cast<std::size_t>((h * n + j) * n + k)] +
                 G(i, h) * dlow;
          }
          geo.dgamma[static_cast<std::size_t>(((l * n + i) * n + j) * n + k)] = s;
        }
      }
    }
  }
  return geo;
}

Curvature curvature_of(const Geometry& geo) {
  const int n = geo.n;
  const auto N = static_cast<std::size_t>(n);
  auto Gam = [&](int i, int j, int k) { return geo.gamma[static_cast<std::size_t>((i * n + j) * n + k)]; };
  auto dGam = [&](int l, int i, int j, int k) {
    return geo.dgamma[static_cast<std::size_t>(((l * n + i) * n + j) * n + k)];
  };
  Curvature c;
  c.sqrt_abs_det = geo.sqrt_det;
  c.riemann.assign(N * N * N * N, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double s = dGam(l, i, j, k) - dGam(k, i, j, l);
          for (int h = 0; h < n; ++h) s += Gam(h, j, k) * Gam(i, h, l) - Gam(h, j, l) * Gam(i, h, k);
          c.riemann[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)] = s;
        }
      }
    }
  }
  c.ricci.assign(N * N, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += c.riemann[static_cast<std::size_t>(((i * n + j) * n + k) * n + i)];
      c.ricci[static_cast<std::size_t>(j * n + k)] = s;
    }
  }
  auto G = [&](int a, int b) { return geo.ginv[static_cast<std::size_t>(a * n + b)]; };
  c.scalar = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) c.scalar += G(j, k) * c.ricci[static_cast<std::size_t>(j * n + k)];
  }
  c.ricci_up.assign(N * N, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) s += G(i, a) * G(j, b) * c.ricci[static_cast<std::size_t>(a * n + b)];
      }
      c.ricci_up[static_cast<std::size_t>(i * n + j)] = s;
    }
  }
  return c;
}

/// Field strength pieces shared by the contravariant and covariant currents.
struct EmFields {
  std::vector<double> grad;  // A^k_{;i} (or A_{k;i}) at i*n + k
  std::vector<double> F;     // F_{ij}
  std::vector<double> Fup;   // F^{ij}
  double invariant = 0.0;    // F_{kl}F^{kl}
};

void raise_field(EmFields& f, const Geometry& geo) {
  const int n = geo.n;
  const auto N = static_cast<std::size_t>(n);
  auto G = [&](int a, int b) { return geo.ginv[static_cast<std::size_t>(a * n + b)]; };
  f.Fup.assign(N * N, 0.0);
  f.invariant = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) s += G(i, a) * G(j, b) * f.F[static_cast<std::size_t>(a * n + b)];
      }
      f.Fup[static_cast<std::size_t>(i * n + j)] = s;
      f.invariant += s * f.F[static_cast<std::size_t>(i * n + j)];
    }
  }
}

std::vector<double> read_potential(const JetPoint& p, int n, std::vector<double>* grad) {
  const auto& layout = p.layout();
  std::vector<double> A(static_cast<std::size_t>(n));
  if (grad) grad->assign(static_cast<std::size_t>(n * n), 0.0);
  for (int k = 0; k < n; ++k) {
    A[static_cast<std::size_t>(k)] = p[layout.slot(k, MultiIndex{})];
    if (!grad) continue;
    for (int i = 0; i < n; ++i) (*grad)[static_cast<std::size_t>(i * n + k)] = p[layout.slot(k, MultiIndex({i}))];
  }
  return A;
}

EmFields contravariant_fields(const JetPoint& p, const Geometry& geo) {
  const int n = geo.n;
  std::vector<double> dA;
  const auto A = read_potential(p, n, &dA);
  EmFields f;
  f.grad = dA;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int h = 0; h < n; ++h) s += geo.gamma[static_cast<std::size_t>((k * n + i) * n + h)] * A[static_cast<std::size_t>(h)];
      f.grad[static_cast<std::size_t>(i * n + k)] += s;
    }
  }
  f.F.assign(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        s += geo.g[static_cast<std::size_t>(j * n + k)] * f.grad[static_cast<std::size_t>(i * n + k)] -
             geo.g[static_cast<std::size_t>(i * n + k)] * f.grad[static_cast<std::size_t>(j * n + k)];
      }
      f.F[static_cast<std::size_t>(i * n + j)] = s;
    }
  }
  raise_field(f, geo);
  return f;
}

EmFields covariant_fields(const JetPoint& p, const Geometry& geo) {
  const int n = geo.n;
  std::vector<double> dA;
  const auto A = read_potential(p, n, &dA);
  EmFields f;
  f.grad = dA;  // A_{l;h} at h*n + l
  for (int h = 0; h < n; ++h) {
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int m = 0; m < n; ++m) s += geo.gamma[static_cast<std::size_t>((m * n + h) * n + l)] * A[static_cast<std::size_t>(m)];
      f.grad[static_cast<std::size_t>(h * n + l)] -= s;
    }
  }
  f.F.assign(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      f.F[static_cast<std::size_t>(i * n + j)] = dA[static_cast<std::size_t>(i * n + j)] - dA[static_cast<std::size_t>(j * n + i)];
    }
  }
  raise_field(f, geo);
  return f;
}

/// T̃ from the contraction g^{ih} X_h^j and the field invariant, where
/// X_h^j = A^l_{;h} F^j_l (contravariant) or A_{l;h} F^{jl} (covariant).
std::vector<double> noether_from(const Geometry& geo, const EmFields& f, bool covariant) {
  const int n = geo.n;
  const auto N = static_cast<std::size_t>(n);
  auto G = [&](int a, int b) { return geo.ginv[static_cast<std::size_t>(a * n + b)]; };
  std::vector<double> X(N * N, 0.0);  // X[h*n + j]
  for (int h = 0; h < n; ++h) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) {
        double Fjl = 0.0;  // F^j_l or F^{jl}
        if (covariant) {
          Fjl = f.Fup[static_cast<std::size_t>(j * n + l)];
        } else {
          for (int m = 0; m < n; ++m) Fjl += G(j, m) * f.F[static_cast<std::size_t>(m * n + l)];
        }
        s += f.grad[static_cast<std::size_t>(h * n + l)] * Fjl;
      }
      X[static_cast<std::size_t>(h * n + j)] = s;
    }
  }
  std::vector<double> T(N * N, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int h = 0; h < n; ++h) s += G(i, h) * X[static_cast<std::size_t>(h * n + j)];
      T[static_cast<std::size_t>(i * n + j)] =
          (-s / (4.0 * kPi) + G(i, j) * f.invariant / (16.0 * kPi)) * geo.sqrt_det;
    }
  }
  return T;
}

std::vector<int> range(int begin, int end) {
  std::vector<int> out;
  for (int c = begin; c < end; ++c) out.push_back(c);
  return out;
}

std::vector<double> embed_source(const std::vector<double>& tensor, int n, int offset) {
  auto comps = to_source_components(tensor, n);
  std::vector<double> out(static_cast<std::size_t>(offset), 0.0);
  out.insert(out.end(), comps.begin(), comps.end());
  return out;
}

}  // namespace

std::shared_ptr<const JetSpec> metric_spec(int n, int order) { return make_spec(n, order, false); }
std::shared_ptr<const JetSpec> em_spec(int n, int order) { return make_spec(n, order, true); }

std::shared_ptr<const JetLayout> metric_layout(int n, int order) {
  return cached_layout(n, metric_components(n), order);
}
std::shared_ptr<const JetLayout> em_layout(int n, int order) {
  return cached_layout(n, n + metric_components(n), order);
}

int metric_components(int n) { return n * (n + 1) / 2; }

int sym_index(int j, int k, int n) {
  if (j > k) std::swap(j, k);
  // rows 0..j-1 hold n, n-1, ..., n-j+1 entries
  return j * n - j * (j - 1) / 2 + (k - j);
}

double eta(int i, int j) {
  if (i != j) return 0.0;
  return i == 0 ? 1.0 : -1.0;
}

JetPoint sample_metric_jet(std::uint64_t seed, int n, int order, const MetricSampleOptions& opts) {
  auto layout = metric_layout(n, order);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pert(-opts.perturbation, opts.perturbation);
  std::uniform_real_distribution<double> deriv(-opts.derivative, opts.derivative);
  JetPoint p(layout);
  for (;;) {
    Eigen::MatrixXd g(n, n);
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        const double v = eta(j, k) + pert(rng);
        g(j, k) = g(k, j) = v;
        p[layout->slot(sym_index(j, k, n), MultiIndex{})] = v;
      }
    }
    if (std::abs(g.determinant()) > 1e-6) break;
  }
  for (int c = 0; c < metric_components(n); ++c) {
    for (std::size_t s : layout->component_slots(c, order)) {
      if (layout->symbol_at(s).order() > 0) p[s] = deriv(rng);
    }
  }
  return p;
}

JetPoint sample_em_jet(std::uint64_t seed, int n, int order, const EmSampleOptions& opts) {
  auto layout = em_layout(n, order);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pot(-opts.potential, opts.potential);
  std::uniform_real_distribution<double> deriv(-opts.derivative, opts.derivative);
  JetPoint p(layout);
  for (int k = 0; k < n; ++k) {
    for (std::size_t s : layout->component_slots(k, order)) {
      p[s] = layout->symbol_at(s).order() <= 1 ? pot(rng) : deriv(rng);
    }
  }
  if (opts.flat) {
    for (int j = 0; j < n; ++j) p[layout->slot(n + sym_index(j, j, n), MultiIndex{})] = eta(j, j);
    if (opts.on_shell && order >= 2) project_on_shell(p, n);
    return p;
  }
  const JetPoint metric = sample_metric_jet(rng(), n, order);
  for (int c = 0; c < metric_components(n); ++c) {
    const auto src = metric.layout().component_slots(c, order);
    const auto dst = layout->component_slots(n + c, order);
    for (std::size_t k = 0; k < src.size(); ++k) p[dst[k]] = metric[src[k]];
  }
  return p;
}

std::vector<double> maxwell_divergence(const JetPoint& p, int n) {
  const auto& layout = p.layout();
  auto dd = [&](int k, int a, int b) { return p[layout.slot(k, MultiIndex({a, b}))]; };
  std::vector<double> M(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += eta(i, i) * dd(j, i, i) - eta(j, j) * dd(i, i, j);
    M[static_cast<std::size_t>(j)] = s;
  }
  return M;
}

void project_on_shell(JetPoint& p, int n) {
  if (n < 2) return;
  const auto M = maxwell_divergence(p, n);
  for (int j = 0; j < n; ++j) {
    const int i = j != 0 ? 0 : 1;
    p[p.layout().slot(j, MultiIndex({i, i}))] -= M[static_cast<std::size_t>(j)] / eta(i, i);
  }
}

std::vector<double> christoffel(const JetPoint& p, int n, int metric_offset) {
  return geometry(p, n, metric_offset, 1).gamma;
}

Curvature curvature(const JetPoint& p, int n, int metric_offset) {
  return curvature_of(geometry(p, n, metric_offset, 2));
}

std::vector<double> inverse_metric(const JetPoint& p, int n, int metric_offset) {
  return geometry(p, n, metric_offset, 0).ginv;
}

double sqrt_abs_det(const JetPoint& p, int n, int metric_offset) {
  return geometry(p, n, metric_offset, 0).sqrt_det;
}

std::vector<double> ricci_source_tensor(const JetPoint& p, int n, double alpha) {
  const Curvature c = curvature(p, n);
  std::vector<double> out = c.ricci_up;
  for (double& v : out) v *= alpha * c.sqrt_abs_det;
  return out;
}

std::vector<double> einstein_tensor_density(const JetPoint& p, int n, double kappa) {
  const Geometry geo = geometry(p, n, 0, 2);
  const Curvature c = curvature_of(geo);
  const double f = c.sqrt_abs_det / (16.0 * kPi * kappa);
  std::vector<double> out(c.ricci_up.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = f * (c.ricci_up[k] - 0.5 * c.scalar * geo.ginv[k]);
  return out;
}

double hilbert_value(const JetPoint& p, int n, double kappa) {
  const Curvature c = curvature(p, n);
  return -c.scalar * c.sqrt_abs_det / (16.0 * kPi * kappa);
}

std::vector<double> to_source_components(const std::vector<double>& tensor, int n) {
  std::vector<double> out(static_cast<std::size_t>(metric_components(n)));
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      const double a = tensor[static_cast<std::size_t>(j * n + k)];
      out[static_cast<std::size_t>(sym_index(j, k, n))] = j == k ? a : a + tensor[static_cast<std::size_t>(k * n + j)];
    }
  }
  return out;
}

std::vector<double> hilbert_tensor_from_el(const std::vector<double>& el, int n, double sqrt_abs_det) {
  std::vector<double> T(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      const double v = -2.0 / sqrt_abs_det * el[static_cast<std::size_t>(sym_index(j, k, n))] / (j == k ? 1.0 : 2.0);
      T[static_cast<std::size_t>(j * n + k)] = T[static_cast<std::size_t>(k * n + j)] = v;
    }
  }
  return T;
}

DensityFn hilbert_density(int n, double kappa) {
  return DensityFn{[n, kappa](const JetPoint& p) { return std::vector<double>{hilbert_value(p, n, kappa)}; }, 2, 1,
                   std::nullopt};
}

DensityFn ricci_source_density(int n, double alpha) {
  return DensityFn{[n, alpha](const JetPoint& p) { return to_source_components(ricci_source_tensor(p, n, alpha), n); },
                   2, static_cast<std::size_t>(metric_components(n)), n / 2.0 - 2.0};
}

DensityFn einstein_density(int n, double kappa) {
  return DensityFn{
      [n, kappa](const JetPoint& p) { return to_source_components(einstein_tensor_density(p, n, kappa), n); }, 2,
      static_cast<std::size_t>(metric_components(n)), n / 2.0 - 2.0};
}

std::vector<double> em_noether_tensor(const JetPoint& p, int n) {
  const Geometry geo = geometry(p, n, n, 1);
  return noether_from(geo, contravariant_fields(p, geo), false);
}

std::vector<double> em_covariant_noether_tensor(const JetPoint& p, int n) {
  const Geometry geo = geometry(p, n, n, 1);
  return noether_from(geo, covariant_fields(p, geo), true);
}

double em_field_invariant(const JetPoint& p, int n) {
  const Geometry geo = geometry(p, n, n, 1);
  return contravariant_fields(p, geo).invariant;
}

double em_vt_closed_form(const JetPoint& p, int n, double alpha) {
  const Geometry geo = geometry(p, n, n, 1);
  return alpha / (16.0 * kPi) * contravariant_fields(p, geo).invariant * geo.sqrt_det;
}

std::vector<double> em_hilbert_tensor(const JetPoint& p, int n, double alpha) {
  const Geometry geo = geometry(p, n, n, 1);
  const EmFields f = contravariant_fields(p, geo);
  std::vector<double> T(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;  // F^{il} F^j_l = F^{il} F^{jm} g_{ml}
      for (int l = 0; l < n; ++l) {
        for (int m = 0; m < n; ++m) {
          s += f.Fup[static_cast<std::size_t>(i * n + l)] * f.Fup[static_cast<std::size_t>(j * n + m)] *
               geo.g[static_cast<std::size_t>(m * n + l)];
        }
      }
      T[static_cast<std::size_t>(i * n + j)] =
          -alpha * (-s / (4.0 * kPi) + geo.ginv[static_cast<std::size_t>(i * n + j)] * f.invariant / (16.0 * kPi));
    }
  }
  return T;
}

EmSymmetrized em_symmetrized_tensor(const JetPoint& p, int n, double alpha) {
  const Geometry geo = geometry(p, n, n, 1);
  const EmFields f = contravariant_fields(p, geo);
  EmSymmetrized out;
  out.noether = noether_from(geo, f, false);
  std::vector<double> dA;
  read_potential(p, n, &dA);
  out.tensor.resize(out.noether.size());
  out.correction.resize(out.noether.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;  // A^i_{,l} F^{jl}
      for (int l = 0; l < n; ++l) {
        s += dA[static_cast<std::size_t>(l * n + i)] * f.Fup[static_cast<std::size_t>(j * n + l)];
      }
      const auto k = static_cast<std::size_t>(i * n + j);
      out.tensor[k] = -alpha * (out.noether[k] + s / (4.0 * kPi));
      out.correction[k] = out.tensor[k] - out.noether[k];
    }
  }
  return out;
}

DensityFn em_source_density(int n, double alpha) {
  return DensityFn{[n, alpha](const JetPoint& p) {
                     auto T = em_noether_tensor(p, n);
                     for (double& v : T) v *= alpha;
                     return embed_source(T, n, n);
                   },
                   1, static_cast<std::size_t>(n + metric_components(n)), n / 2.0 - 1.0};
}

DensityFn em_covariant_source_density(int n, double alpha) {
  return DensityFn{[n, alpha](const JetPoint& p) {
                     auto T = em_covariant_noether_tensor(p, n);
                     for (double& v : T) v *= alpha;
                     return embed_source(T, n, n);
                   },
                   1, static_cast<std::size_t>(n + metric_components(n)), n / 2.0 - 3.0};
}

std::vector<int> em_metric_component_ids(int n) { return range(n, n + metric_components(n)); }

std::vector<double> em_pipeline_tensor(const JetPoint& p, int n, double alpha, const NestedFdOptions& fd,
                                       const QuadratureOptions& quad) {
  const auto comps = em_metric_component_ids(n);
  const DensityFn L = vt_lagrangian_density(em_source_density(n, alpha), comps, quad);
  return hilbert_tensor_from_el(numeric_euler_lagrange(L, p, fd, comps), n, sqrt_abs_det(p, n, n));
}

double covariant_potential_vt(const JetPoint& p, int n, double alpha, const QuadratureOptions& quad) {
  return numeric_vt_lagrangian(em_covariant_source_density(n, alpha), p, em_metric_component_ids(n), quad);
}

// ---------------------------------------------------------------- scenarios

namespace {

double rel_residual(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(b[k])));
  return r;
}

/// max|a − b| / max|b|
double norm_residual(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::abs(a[k] - b[k]));
    scale = std::max(scale, std::abs(b[k]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

struct Ctx {
  const Scenario& s;
  int n;
  CheckConfig cfg;
  std::uint64_t seed(int salt, int k) const {
    return s.seed + static_cast<std::uint64_t>(salt) * 100003ULL + static_cast<std::uint64_t>(k);
  }
};

NumericCheck finish(std::string name, const CheckConfig& cfg, double residual, bool pass, std::string note = {}) {
  NumericCheck c;
  c.name = std::move(name);
  c.points = cfg.points;
  c.tolerance = cfg.tolerance;
  c.max_residual = residual;
  c.status = pass ? CheckStatus::Passed : CheckStatus::Failed;
  c.note = std::move(note);
  return c;
}

NumericCheck skipped(std::string name, const CheckConfig& cfg, std::string note) {
  NumericCheck c;
  c.name = std::move(name);
  c.tolerance = cfg.tolerance;
  c.note = std::move(note);
  return c;
}

NumericCheck check_hilbert_identity(const Ctx& x) {
  if (x.n != 4) return skipped("hilbert_identity", x.cfg, "needs dimension 4 (homogeneity weight n/2 - 2 = 0)");
  const double alpha = -1.0 / (16.0 * kPi * x.s.kappa);
  const DensityFn eps = ricci_source_density(x.n, alpha);
  const auto comps = range(0, metric_components(x.n));
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(1, k), x.n, 2);
    const double got = numeric_vt_lagrangian(eps, p, comps);
    r = std::max(r, rel_residual({got}, {hilbert_value(p, x.n, x.s.kappa)}));
  }
  return finish("hilbert_identity", x.cfg, r, r <= x.cfg.tolerance);
}

NumericCheck check_einstein_as_el(const Ctx& x) {
  const DensityFn L = hilbert_density(x.n, x.s.kappa);
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(2, k), x.n, 4);
    const auto el = numeric_euler_lagrange(L, p);
    const auto expected = to_source_components(einstein_tensor_density(p, x.n, x.s.kappa), x.n);
    r = std::max(r, x.n == 2 ? rel_residual(el, expected) : norm_residual(el, expected));
  }
  return finish("einstein_as_el", x.cfg, r, r <= x.cfg.tolerance,
                x.n == 2 ? "absolute residual; both sides vanish in dimension 2" : "relative to max |G|");
}

std::vector<double> completion_el(const Ctx& x, const JetPoint& p, double alpha) {
  const auto comps = range(0, metric_components(x.n));
  const DensityFn L = vt_lagrangian_density(ricci_source_density(x.n, alpha), comps);
  return numeric_euler_lagrange(L, p);
}

NumericCheck check_alpha_independence(const Ctx& x) {
  if (x.n != 4) return skipped("alpha_independence", x.cfg, "needs dimension 4");
  const double alpha = -1.0 / (16.0 * kPi * x.s.kappa);
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(3, k), x.n, 4);
    const auto a = completion_el(x, p, alpha);
    auto b = completion_el(x, p, 3.0 * alpha);
    for (double& v : b) v /= 3.0;
    r = std::max(r, norm_residual(b, a));
  }
  return finish("alpha_independence", x.cfg, r, r <= x.cfg.tolerance, "E(lambda_{3a})/3 against E(lambda_a)");
}

NumericCheck check_einstein_completion(const Ctx& x) {
  if (x.n != 4) return skipped("einstein_completion", x.cfg, "needs dimension 4");
  const double alpha = -1.0 / (16.0 * kPi * x.s.kappa);
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(4, k), x.n, 4);
    const auto got = completion_el(x, p, alpha);
    r = std::max(r, norm_residual(got, to_source_components(einstein_tensor_density(p, x.n, x.s.kappa), x.n)));
  }
  return finish("einstein_completion", x.cfg, r, r <= x.cfg.tolerance, "E(lambda_eps) of the Ricci source against G");
}

NumericCheck check_helmholtz_einstein(const Ctx& x) {
  const DensityFn eps = einstein_density(x.n, x.s.kappa);
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(5, k), x.n, 4);
    r = std::max(r, numeric_helmholtz(eps, p, 2).max_abs);
  }
  return finish("helmholtz_einstein", x.cfg, r, r < x.cfg.tolerance);
}

NumericCheck check_helmholtz_ricci(const Ctx& x) {
  if (x.n == 2) return skipped("helmholtz_ricci_witness", x.cfg, "R^{ij} = (R/2) g^{ij} is variational in dimension 2");
  const DensityFn eps = ricci_source_density(x.n, -1.0 / (16.0 * kPi * x.s.kappa));
  double smallest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(6, k), x.n, 4);
    smallest = std::min(smallest, numeric_helmholtz(eps, p, 2).max_abs);
  }
  return finish("helmholtz_ricci_witness", x.cfg, smallest, smallest > x.cfg.tolerance,
                "smallest max |H| over the points; must exceed the tolerance");
}

NumericCheck check_em_symmetrization(const Ctx& x) {
  if (x.n != 4) return skipped("em_symmetrization", x.cfg, "needs dimension 4");
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_em_jet(x.seed(7, k), x.n, 2);
    const auto got = em_pipeline_tensor(p, x.n, -1.0);
    const auto expected = em_symmetrized_tensor(p, x.n, -1.0).tensor;
    double diff = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      diff = std::max(diff, std::abs(got[i] - expected[i]));
      scale = std::max(scale, std::abs(expected[i]));
    }
    r = std::max(r, diff / scale);
  }
  return finish("em_symmetrization", x.cfg, r, r <= x.cfg.tolerance, "flat on-shell jets, alpha = -1");
}

NumericCheck check_em_symmetry(const Ctx& x) {
  if (x.n != 4) return skipped("em_symmetry", x.cfg, "needs dimension 4");
  double r = 0.0;
  double asym = std::numeric_limits<double>::infinity();
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_em_jet(x.seed(7, k), x.n, 2);
    const auto sym = em_symmetrized_tensor(p, x.n, -1.0);
    double a = 0.0;
    for (int i = 0; i < x.n; ++i) {
      for (int j = 0; j < x.n; ++j) {
        r = std::max(r, std::abs(sym.tensor[static_cast<std::size_t>(i * x.n + j)] -
                                 sym.tensor[static_cast<std::size_t>(j * x.n + i)]));
        a = std::max(a, std::abs(sym.noether[static_cast<std::size_t>(i * x.n + j)] -
                                 sym.noether[static_cast<std::size_t>(j * x.n + i)]));
      }
    }
    asym = std::min(asym, a);
  }
  std::ostringstream note;
  note << "smallest asymmetry of the Noether current " << asym;
  return finish("em_symmetry", x.cfg, r, r <= x.cfg.tolerance && asym > x.cfg.tolerance, note.str());
}

NumericCheck check_em_vt_density(const Ctx& x) {
  if (x.n != 4) return skipped("em_vt_density", x.cfg, "needs dimension 4");
  const DensityFn eps = em_source_density(x.n, -1.0);
  const auto comps = em_metric_component_ids(x.n);
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    EmSampleOptions opts;
    opts.flat = false;
    const JetPoint p = sample_em_jet(x.seed(8, k), x.n, 1, opts);
    const double got = numeric_vt_lagrangian(eps, p, comps);
    r = std::max(r, rel_residual({got}, {em_vt_closed_form(p, x.n, -1.0)}));
  }
  return finish("em_vt_density", x.cfg, r, r <= x.cfg.tolerance, "curved jets, alpha = -1");
}

NumericCheck check_covariant_divergence(const Ctx& x) {
  if (x.n != 4) return skipped("covariant_divergence", x.cfg, "needs dimension 4");
  int missed = 0;
  EmSampleOptions opts;
  opts.flat = false;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_em_jet(x.seed(9, k), x.n, 1, opts);
    try {
      covariant_potential_vt(p, x.n, -1.0);
      ++missed;
    } catch (const NonFiniteIntegrand&) {
    }
  }
  JetPoint zero = sample_em_jet(x.seed(9, x.cfg.points), x.n, 1, opts);
  for (int c = 0; c < x.n; ++c) {
    for (std::size_t s : zero.layout().component_slots(c, 1)) zero[s] = 0.0;
  }
  double zero_value = std::numeric_limits<double>::quiet_NaN();
  try {
    zero_value = covariant_potential_vt(zero, x.n, -1.0);
  } catch (const NonFiniteIntegrand&) {
  }
  const bool zero_ok = zero_value == 0.0;
  std::string note = std::to_string(x.cfg.points - missed) + "/" + std::to_string(x.cfg.points) +
                     " jets reported divergence; zero field gives " + (zero_ok ? "0" : "a nonzero or divergent value");
  return finish("covariant_divergence", x.cfg, missed, missed == 0 && zero_ok, note);
}

NumericCheck check_christoffel_scaling(const Ctx& x) {
  const auto comps = range(0, metric_components(x.n));
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(10, k), x.n, 1);
    const auto base = christoffel(p, x.n);
    for (double u : {std::ldexp(1.0, -10), 3.0}) r = std::max(r, rel_residual(christoffel(scale_components(p, comps, u), x.n), base));
  }
  return finish("christoffel_scaling", x.cfg, r, r <= x.cfg.tolerance, "Gamma(u g) = Gamma(g)");
}

NumericCheck check_curvature_scaling(const Ctx& x) {
  const auto comps = range(0, metric_components(x.n));
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(11, k), x.n, 2);
    const Curvature base = curvature(p, x.n);
    for (double u : {std::ldexp(1.0, -10), 3.0}) {
      const Curvature c = curvature(scale_components(p, comps, u), x.n);
      r = std::max(r, rel_residual(c.riemann, base.riemann));
      r = std::max(r, rel_residual({c.scalar * u}, {base.scalar}));
      auto up = c.ricci_up;
      for (double& v : up) v *= u * u;
      r = std::max(r, rel_residual(up, base.ricci_up));
    }
  }
  return finish("curvature_scaling", x.cfg, r, r <= x.cfg.tolerance, "R^i_jkl(u g) = R^i_jkl(g), R(u g) = R(g)/u");
}

NumericCheck check_einstein_2d(const Ctx& x) {
  if (x.n != 2) return skipped("einstein_2d_zero", x.cfg, "applies to dimension 2 only");
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const JetPoint p = sample_metric_jet(x.seed(12, k), x.n, 2);
    for (double v : einstein_tensor_density(p, x.n, x.s.kappa)) r = std::max(r, std::abs(v));
  }
  return finish("einstein_2d_zero", x.cfg, r, r <= x.cfg.tolerance);
}

NumericCheck check_sphere(const Ctx& x) {
  if (x.n != 2) return skipped("sphere_scalar_curvature", x.cfg, "applies to dimension 2 only");
  const auto layout = metric_layout(2, 2);
  double r = 0.0;
  for (int k = 0; k < x.cfg.points; ++k) {
    const double theta = 0.2 + 2.7 * (k + 0.5) / x.cfg.points;
    JetPoint p(layout);
    p[layout->slot(sym_index(0, 0, 2), MultiIndex{})] = 1.0;
    p[layout->slot(sym_index(1, 1, 2), MultiIndex{})] = std::sin(theta) * std::sin(theta);
    p[layout->slot(sym_index(1, 1, 2), MultiIndex({0}))] = std::sin(2.0 * theta);
    p[layout->slot(sym_index(1, 1, 2), MultiIndex({0, 0}))] = 2.0 * std::cos(2.0 * theta);
    r = std::max(r, std::abs(curvature(p, 2).scalar - 2.0));
  }
  return finish("sphere_scalar_curvature", x.cfg, r, r <= x.cfg.tolerance, "unit 2-sphere, R = 2");
}

using CheckFn = NumericCheck (*)(const Ctx&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"hilbert_identity", check_hilbert_identity},
      {"einstein_as_el", check_einstein_as_el},
      {"alpha_independence", check_alpha_independence},
      {"einstein_completion", check_einstein_completion},
      {"helmholtz_einstein", check_helmholtz_einstein},
      {"helmholtz_ricci_witness", check_helmholtz_ricci},
      {"em_symmetrization", check_em_symmetrization},
      {"em_symmetry", check_em_symmetry},
      {"em_vt_density", check_em_vt_density},
      {"covariant_divergence", check_covariant_divergence},
      {"christoffel_scaling", check_christoffel_scaling},
      {"curvature_scaling", check_curvature_scaling},
      {"einstein_2d_zero", check_einstein_2d},
      {"sphere_scalar_curvature", check_sphere},
  };
  return checks;
}

}  // namespace

std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

CheckConfig default_check(const std::string& name, const Scenario& s) {
  static const std::map<std::string, CheckConfig> defaults = {
      {"hilbert_identity", {1e-10, 0}},      {"einstein_as_el", {1e-3, 20}},
      {"alpha_independence", {1e-5, 3}},     {"einstein_completion", {1e-3, 3}},
      {"helmholtz_einstein", {1e-4, 2}},     {"helmholtz_ricci_witness", {1e-2, 2}},
      {"em_symmetrization", {1e-3, 50}},     {"em_symmetry", {1e-10, 50}},
      {"em_vt_density", {1e-10, 50}},        {"covariant_divergence", {0.0, 20}},
      {"christoffel_scaling", {1e-12, 20}},  {"curvature_scaling", {1e-10, 20}},
      {"einstein_2d_zero", {1e-12, 20}},     {"sphere_scalar_curvature", {1e-12, 16}},
  };
  auto it = defaults.find(name);
  if (it == defaults.end()) throw Error("unknown check '" + name + "'");
  CheckConfig cfg = it->second;
  if (cfg.points == 0) cfg.points = s.points;
  if (auto o = s.checks.find(name); o != s.checks.end()) {
    if (o->second.tolerance > 0.0) cfg.tolerance = o->second.tolerance;
    if (o->second.points > 0) cfg.points = o->second.points;
  }
  return cfg;
}

std::vector<NumericCheck> run_scenario(const Scenario& s) {
  if (s.dimension < 2) throw Error("scenario dimension must be at least 2");
  for (const auto& [name, cfg] : s.checks) default_check(name, s);
  std::vector<NumericCheck> out;
  for (const auto& [name, fn] : registry()) {
    const CheckConfig cfg = default_check(name, s);
    try {
      out.push_back(fn(Ctx{s, s.dimension, cfg}));
    } catch (const Error& e) {
      NumericCheck c = skipped(name, cfg, std::string("error: ") + e.what());
      c.status = CheckStatus::Failed;
      c.max_residual = std::numeric_limits<double>::quiet_NaN();
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace varcomp::gr
