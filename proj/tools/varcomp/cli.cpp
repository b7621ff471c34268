#include "varcomp/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "varcomp/errors.hpp"
#include "varcomp/gr.hpp"
#include "varcomp/numjet.hpp"
#include "varcomp/parser.hpp"
#include "varcomp/render.hpp"
#include "varcomp/report.hpp"
#include "varcomp/variational.hpp"

namespace varcomp::cli {

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string format = "plain";
  std::optional<std::uint64_t> seed;
  std::optional<int> points;
  std::optional<double> tolerance;
  bool reduce_order = false;
  bool via_helmholtz = false;
  bool numeric_only = false;
  std::string point_file;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ReportFormat report_format(const std::string& f) {
  if (f == "latex") return ReportFormat::Latex;
  if (f == "json") return ReportFormat::Json;
  return ReportFormat::Plain;
}

CheckSettings settings(const ProblemFile& pf, const RunConfig& cfg) {
  CheckSettings s = pf.checks;
  if (cfg.seed) s.seed = *cfg.seed;
  if (cfg.points) s.points = *cfg.points;
  if (cfg.tolerance) s.tolerance = *cfg.tolerance;
  return s;
}

/// The file's source form, or the Euler-Lagrange form of its Lagrangian.
SourceForm source_of(const ProblemFile& pf) {
  if (pf.source) return *pf.source;
  if (pf.lagrangian) return euler_lagrange(*pf.lagrangian);
  throw SemanticError("the file declares neither a source form nor a Lagrangian");
}

bool evaluable(const JetSpec& spec) {
  return std::all_of(spec.atoms().begin(), spec.atoms().end(), [](const AtomDecl& a) { return bool(a.evaluator); });
}

std::vector<int> scaled_components(const ProblemFile& pf) {
  if (!pf.scale_declared) return {};
  return pf.spec->components_of(pf.scaled_fields);
}

std::vector<int> all_components(const JetSpec& spec) {
  std::vector<int> out(static_cast<std::size_t>(spec.component_count()));
  for (int c = 0; c < spec.component_count(); ++c) out[static_cast<std::size_t>(c)] = c;
  return out;
}

NumericCheck skipped_check(std::string name, std::string note) {
  NumericCheck c;
  c.name = std::move(name);
  c.note = std::move(note);
  return c;
}

const NestedFdOptions kOracleFd{1e-2, true};

/// Symbolic Helmholtz coefficients against nested finite differences of ε.
NumericCheck helmholtz_check(const SourceForm& eps, const HelmholtzTensor& h, const CheckSettings& cs) {
  if (!evaluable(*eps.spec)) return skipped_check("numeric_helmholtz", "atoms without evaluators");
  const int r = eps.order();
  const auto& spec = *h.spec;
  std::vector<Expr> exprs = eps.components;
  for (const auto& [key, e] : h.entries) exprs.push_back(e);
  const auto params = parameter_symbols(exprs);
  const DensityFn f = density_from_exprs(eps.spec, eps.components);
  auto layout = std::make_shared<const JetLayout>(spec.base_dim(), spec.component_count(), 2 * r);
  std::mt19937_64 rng(cs.seed);
  NumericCheck c;
  c.name = "numeric_helmholtz";
  c.points = cs.points;
  c.tolerance = cs.tolerance;
  for (int k = 0; k < cs.points; ++k) {
    const JetPoint p = random_jet_point(layout, rng, params);
    const NumericHelmholtz num = numeric_helmholtz(f, p, r, kOracleFd);
    for (const auto& [key, v] : num.entries) {
      const double sym = eval(h.entry(key.sigma, key.nu, key.J), p, spec);
      c.max_residual = std::max(c.max_residual, std::abs(v - sym));
    }
  }
  c.status = c.max_residual <= c.tolerance ? CheckStatus::Passed : CheckStatus::Failed;
  return c;
}

/// τ from the numeric homotopy integral and nested finite differences.
NumericCheck completion_check(const SourceForm& eps, const SourceForm& tau, const std::vector<int>& scaled,
                              const CheckSettings& cs) {
  if (!evaluable(*eps.spec)) return skipped_check("numeric_completion", "atoms without evaluators");
  const int r = eps.order();
  const auto& spec = *tau.spec;
  std::vector<Expr> exprs = eps.components;
  exprs.insert(exprs.end(), tau.components.begin(), tau.components.end());
  const auto params = parameter_symbols(exprs);
  const DensityFn f = density_from_exprs(eps.spec, eps.components);
  const DensityFn L = vt_lagrangian_density(f, scaled.empty() ? all_components(spec) : scaled);
  auto layout = std::make_shared<const JetLayout>(spec.base_dim(), spec.component_count(), std::max(2 * r, 1));
  std::mt19937_64 rng(cs.seed);
  NumericCheck c;
  c.name = "numeric_completion";
  c.points = cs.points;
  c.tolerance = cs.tolerance;
  for (int k = 0; k < cs.points; ++k) {
    const JetPoint p = random_jet_point(layout, rng, params);
    const auto el = numeric_euler_lagrange(L, p, kOracleFd);
    const auto values = f(p);
    for (std::size_t s = 0; s < el.size(); ++s) {
      const double sym = eval(tau.components[s], p, spec);
      c.max_residual = std::max(c.max_residual, std::abs(el[s] - values[s] - sym));
    }
  }
  c.status = c.max_residual <= c.tolerance ? CheckStatus::Passed : CheckStatus::Failed;
  return c;
}

bool any_failed(const std::vector<NumericCheck>& checks) {
  return std::any_of(checks.begin(), checks.end(), [](const NumericCheck& c) { return c.status == CheckStatus::Failed; });
}

ZeroTestOptions zero_options(const CheckSettings& cs) {
  ZeroTestOptions z;
  z.points = cs.points;
  z.seed = cs.seed;
  return z;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const ProblemFile pf = parse(read_file(cfg.input));
  const CheckSettings cs = settings(pf, cfg);
  const SourceForm eps = source_of(pf);
  Report rep;
  rep.command = "check";
  rep.input = cfg.input;
  rep.seed = cs.seed;
  rep.spec = eps.spec;
  if (cfg.numeric_only) {
    if (!evaluable(*eps.spec)) throw AtomEvalFailure("numeric check needs evaluators for every atom");
    const DensityFn f = density_from_exprs(eps.spec, eps.components);
    const int r = eps.order();
    auto layout = std::make_shared<const JetLayout>(eps.spec->base_dim(), eps.spec->component_count(), 2 * r);
    std::mt19937_64 rng(cs.seed);
    const auto params = parameter_symbols(eps.components);
    NumericCheck c;
    c.name = "numeric_helmholtz_zero";
    c.points = cs.points;
    c.tolerance = cs.tolerance;
    for (int k = 0; k < cs.points; ++k) {
      c.max_residual = std::max(c.max_residual, numeric_helmholtz(f, random_jet_point(layout, rng, params), r, kOracleFd).max_abs);
    }
    c.status = c.max_residual <= c.tolerance ? CheckStatus::Passed : CheckStatus::Failed;
    c.note = "largest |H| at sampled points";
    rep.verdict = Verdict{c.status == CheckStatus::Passed, VerdictPath::Numeric, c.max_residual};
    rep.numeric_checks.push_back(c);
  } else {
    HelmholtzTensor h = helmholtz(eps);
    rep.verdict = decide_variational(h, zero_options(cs));
    rep.numeric_checks.push_back(helmholtz_check(eps, h, cs));
    rep.helmholtz = std::move(h);
  }
  out << render_report(rep, report_format(cfg.format));
  if (!rep.verdict->variational) return kCheckFailed;
  return any_failed(rep.numeric_checks) ? kCheckFailed : kOk;
}

int cmd_complete(const RunConfig& cfg, std::ostream& out) {
  const ProblemFile pf = parse(read_file(cfg.input));
  const CheckSettings cs = settings(pf, cfg);
  const SourceForm eps = source_of(pf);
  const auto scaled = scaled_components(pf);
  Report rep;
  rep.command = "complete";
  rep.input = cfg.input;
  rep.seed = cs.seed;
  rep.spec = eps.spec;
  if (cfg.via_helmholtz && pf.scale_declared && scaled != all_components(*eps.spec)) {
    throw SemanticError("--via-helmholtz uses the homothety of every field; remove the scale statement");
  }
  rep.vt_lagrangian = vt_lagrangian(eps, pf.scale_declared ? pf.scaled_fields : std::vector<int>{});
  if (cfg.reduce_order) rep.reduced_lagrangian = reduce_order(*rep.vt_lagrangian);
  rep.euler_lagrange = euler_lagrange(*rep.vt_lagrangian);
  rep.completion = cfg.via_helmholtz ? completion_via_helmholtz(eps) : *rep.euler_lagrange - eps;
  rep.completed = eps + *rep.completion;
  if (cfg.via_helmholtz && !(*rep.completed == *rep.euler_lagrange)) {
    NumericCheck c;
    c.name = "helmholtz_route";
    c.status = CheckStatus::Failed;
    c.note = "eps + tau differs from E(lambda_eps)";
    rep.numeric_checks.push_back(c);
  }
  if (rep.reduced_lagrangian) {
    NumericCheck c;
    c.name = "reduced_euler_lagrange";
    c.status = euler_lagrange(*rep.reduced_lagrangian) == *rep.euler_lagrange ? CheckStatus::Passed : CheckStatus::Failed;
    c.note = "structural comparison with E(lambda_eps)";
    rep.numeric_checks.push_back(c);
  }
  rep.numeric_checks.push_back(completion_check(eps, *rep.completion, scaled, cs));
  out << render_report(rep, report_format(cfg.format));
  return any_failed(rep.numeric_checks) ? kCheckFailed : kOk;
}

gr::Scenario read_scenario(const std::string& path) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError("scenario '" + path + "': " + e.what());
  }
  gr::Scenario s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") {
        s.seed = v.get<std::uint64_t>();
      } else if (key == "dimension") {
        s.dimension = v.get<int>();
      } else if (key == "points") {
        s.points = v.get<int>();
      } else if (key == "kappa") {
        s.kappa = v.get<double>();
      } else if (key == "checks") {
        for (const auto& [name, c] : v.items()) {
          gr::CheckConfig cc;
          for (const auto& [field, value] : c.items()) {
            if (field == "tolerance") {
              cc.tolerance = value.get<double>();
            } else if (field == "points") {
              cc.points = value.get<int>();
            } else {
              throw InputError("scenario '" + path + "': unknown field '" + field + "' in check '" + name + "'");
            }
          }
          s.checks[name] = cc;
        }
      } else {
        throw InputError("scenario '" + path + "': unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InputError("scenario '" + path + "': " + e.what());
  }
  if (s.dimension < 2) throw InputError("scenario dimension must be at least 2");
  if (s.points < 1) throw InputError("scenario point count must be positive");
  if (!(s.kappa > 0.0)) throw InputError("scenario kappa must be positive");
  for (const auto& [name, c] : s.checks) {
    if (c.tolerance < 0.0 || c.points < 0) throw InputError("check '" + name + "' needs a positive tolerance and point count");
  }
  return s;
}

int cmd_verify_gr(const RunConfig& cfg, std::ostream& out) {
  gr::Scenario s = read_scenario(cfg.input);
  if (cfg.seed) s.seed = *cfg.seed;
  if (cfg.points) s.points = *cfg.points;
  Report rep;
  rep.command = "verify-gr";
  rep.input = cfg.input;
  rep.seed = s.seed;
  rep.numeric_checks = gr::run_scenario(s);
  out << render_report(rep, report_format(cfg.format));
  return any_failed(rep.numeric_checks) ? kCheckFailed : kOk;
}

std::string format_value(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const ProblemFile pf = parse(read_file(cfg.input));
  const auto values = parse_point(read_file(cfg.point_file), *pf.spec);
  const JetSpec& spec = *pf.spec;
  int order = 0;
  for (const auto& [s, v] : values) order = std::max(order, s.order());
  auto layout = std::make_shared<const JetLayout>(spec.base_dim(), spec.component_count(), order);
  JetPoint p(layout);
  std::vector<Symbol> given;
  for (const auto& [s, v] : values) {
    p.set(s, v);
    given.push_back(s);
  }
  std::vector<std::pair<std::string, Expr>> targets;
  if (pf.source) {
    for (std::size_t k = 0; k < pf.source->components.size(); ++k) {
      targets.emplace_back(spec.component_name(static_cast<int>(k)), pf.source->components[k]);
    }
  } else if (pf.lagrangian) {
    targets.emplace_back(pf.lagrangian_name.empty() ? "L" : pf.lagrangian_name, pf.lagrangian->density);
  } else {
    throw SemanticError("the file declares neither a source form nor a Lagrangian");
  }
  for (const auto& [name, e] : targets) {
    for (const Symbol& s : e.symbols()) {
      if (s.kind == SymbolKind::Atom) continue;
      if (std::find(given.begin(), given.end(), s) == given.end()) {
        throw IncompletePoint("point file gives no value for " + spec.symbol_name(s));
      }
    }
  }
  if (cfg.format == "json") {
    nlohmann::ordered_json j;
    j["command"] = "eval";
    j["input"] = cfg.input;
    j["point"] = cfg.point_file;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [name, e] : targets) arr.push_back({{"component", name}, {"value", eval(e, p, spec)}});
    j["values"] = arr;
    out << j.dump(2) << "\n";
  } else {
    for (const auto& [name, e] : targets) out << name << " = " << format_value(eval(e, p, spec)) << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variationality tests, Vainberg-Tonti Lagrangians and variational completions", "varcomp"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"plain", "latex", "json"}));
    sub->add_option("--seed", cfg.seed, "Seed for every random draw");
    sub->add_option("--points", cfg.points, "Number of sampled points")->check(CLI::PositiveNumber);
  };

  auto* check = app.add_subcommand("check", "Helmholtz test of a source form");
  check->add_option("file", cfg.input, "Problem file")->required();
  check->add_option("--tolerance", cfg.tolerance, "Numeric check tolerance")->check(CLI::PositiveNumber);
  check->add_flag("--numeric-only", cfg.numeric_only, "Decide from nested finite differences only");
  add_common(check);

  auto* complete = app.add_subcommand("complete", "Vainberg-Tonti Lagrangian and canonical completion");
  complete->add_option("file", cfg.input, "Problem file")->required();
  complete->add_option("--tolerance", cfg.tolerance, "Numeric check tolerance")->check(CLI::PositiveNumber);
  complete->add_flag("--reduce-order", cfg.reduce_order, "Also integrate the Lagrangian by parts");
  complete->add_flag("--via-helmholtz", cfg.via_helmholtz, "Build the completion from Helmholtz coefficients");
  add_common(complete);

  auto* verify = app.add_subcommand("verify-gr", "Run the gravitational and electromagnetic fixture checks");
  verify->add_option("scenario", cfg.input, "Scenario file (JSON)")->required();
  add_common(verify);

  auto* evalc = app.add_subcommand("eval", "Evaluate a problem's components at a point");
  evalc->add_option("file", cfg.input, "Problem file")->required();
  evalc->add_option("--point", cfg.point_file, "Point file")->required();
  evalc->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"plain", "json"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (check->parsed()) return cmd_check(cfg, out);
    if (complete->parsed()) return cmd_complete(cfg, out);
    if (verify->parsed()) return cmd_verify_gr(cfg, out);
    return cmd_eval(cfg, out);
  } catch (const DivergentHomotopy& e) {
    err << "error: divergent homotopy integral (weight " << e.weight() << "): " << e.what() << "\n";
    return kDivergent;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace varcomp::cli
