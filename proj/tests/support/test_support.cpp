#include "test_support.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace varcomp::testing {

std::string data_path(const std::string& relative) { return std::string(VARCOMP_DATA_DIR) + "/" + relative; }

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ProblemFile load_problem(const std::string& relative) { return parse(read_text(data_path("problems/" + relative))); }

std::shared_ptr<JetSpec> scalar_chart(int n, int m, int r) {
  static const char* bases[] = {"t", "x"};
  static const char* fields[] = {"u", "v"};
  auto spec = std::make_shared<JetSpec>();
  for (int i = 0; i < n; ++i) spec->add_base(bases[i]);
  for (int f = 0; f < m; ++f) spec->add_field(fields[f]);
  spec->set_max_order(r);
  return spec;
}

Expr random_polynomial(const JetSpec& spec, int order, std::mt19937_64& rng, int max_terms, int max_degree) {
  std::vector<Expr> atoms;
  for (int i = 0; i < spec.base_dim(); ++i) atoms.push_back(spec.base(i));
  for (int c = 0; c < spec.component_count(); ++c) {
    for (const auto& J : multi_indices_up_to(spec.base_dim(), order)) atoms.push_back(spec.coord(c, J));
  }
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<int> degree(1, max_degree);
  std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
  std::uniform_int_distribution<int> coeff(-3, 3);
  Expr out;
  const int terms = nterms(rng);
  for (int k = 0; k < terms; ++k) {
    int c = coeff(rng);
    if (c == 0) c = 1;
    Expr term(c);
    const int d = degree(rng);
    for (int f = 0; f < d; ++f) term *= atoms[pick(rng)];
    out += term;
  }
  return out;
}

namespace {

std::shared_ptr<JetSpec> random_chart(std::mt19937_64& rng, int& order) {
  std::uniform_int_distribution<int> small(1, 2);
  const int n = small(rng);
  const int m = small(rng);
  order = small(rng);
  return scalar_chart(n, m, order);
}

}  // namespace

RandomProblem random_lagrangian(std::mt19937_64& rng) {
  int order = 0;
  auto spec = random_chart(rng, order);
  return {spec, random_polynomial(*spec, order, rng)};
}

SourceForm random_source_form(std::mt19937_64& rng) {
  int order = 0;
  auto spec = random_chart(rng, order);
  SourceForm eps{spec, {}};
  for (int c = 0; c < spec->component_count(); ++c) eps.components.push_back(random_polynomial(*spec, order, rng, 4, 3));
  return eps;
}

JetPoint random_point(const JetSpec& spec, int order, std::mt19937_64& rng, const std::vector<Expr>& exprs) {
  auto layout = std::make_shared<const JetLayout>(spec.base_dim(), spec.component_count(), order);
  return random_jet_point(layout, rng, parameter_symbols(exprs));
}

double evaluate(const Expr& e, const JetPoint& p) {
  double sum = 0.0;
  for (const auto& t : e.terms()) {
    double v = static_cast<double>(t.coeff);
    for (const auto& f : t.monomial) v *= std::pow(p.value(f.symbol), f.exponent);
    sum += v;
  }
  return sum;
}

}  // namespace varcomp::testing
