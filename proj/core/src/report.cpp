#include "varcomp/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace varcomp {

namespace {

using json = nlohmann::ordered_json;

std::string verdict_word(const Report& r) {
  if (!r.verdict) return "skipped";
  return r.verdict->variational ? "variational" : "non-variational";
}

std::string path_word(const Report& r) {
  if (!r.verdict) return "skipped";
  return r.verdict->path == VerdictPath::Symbolic ? "symbolic" : "numeric";
}

std::string multi_index_plain(const MultiIndex& J, const JetSpec& spec) {
  std::string out;
  for (std::size_t k = 0; k < J.indices().size(); ++k) {
    out += (k ? ", " : "") + spec.bases()[static_cast<std::size_t>(J.indices()[k])];
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

json components_json(const SourceForm& f) {
  json arr = json::array();
  for (std::size_t k = 0; k < f.components.size(); ++k) {
    arr.push_back({{"component", f.spec->component_name(static_cast<int>(k))},
                   {"expr", render(f.components[k], *f.spec, Format::Plain)}});
  }
  return arr;
}

json numeric_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string to_json(const Report& r) {
  json j;
  j["command"] = r.command;
  j["input"] = r.input;
  j["seed"] = r.seed;
  j["verdict"] = verdict_word(r);
  j["verdict_path"] = path_word(r);
  if (r.helmholtz) {
    json arr = json::array();
    for (const auto& [key, e] : r.helmholtz->entries) {
      json idx = json::array();
      for (int i : key.J.indices()) idx.push_back(r.helmholtz->spec->bases()[static_cast<std::size_t>(i)]);
      arr.push_back({{"sigma", r.helmholtz->spec->component_name(key.sigma)},
                     {"nu", r.helmholtz->spec->component_name(key.nu)},
                     {"J", idx},
                     {"expr", render(e, *r.helmholtz->spec, Format::Plain)}});
    }
    j["helmholtz"] = arr;
  } else {
    j["helmholtz"] = "skipped";
  }
  j["vt_lagrangian"] = r.vt_lagrangian ? json(render(r.vt_lagrangian->density, *r.vt_lagrangian->spec)) : json("skipped");
  j["reduced_lagrangian"] =
      r.reduced_lagrangian ? json(render(r.reduced_lagrangian->density, *r.reduced_lagrangian->spec)) : json("skipped");
  j["euler_lagrange"] = r.euler_lagrange ? components_json(*r.euler_lagrange) : json("skipped");
  j["completion"] = r.completion ? components_json(*r.completion) : json("skipped");
  j["completed"] = r.completed ? components_json(*r.completed) : json("skipped");
  json checks = json::array();
  for (const auto& c : r.numeric_checks) {
    checks.push_back({{"name", c.name},
                      {"status", to_string(c.status)},
                      {"points", c.points},
                      {"max_residual", numeric_json(c.max_residual)},
                      {"tolerance", c.tolerance},
                      {"note", c.note}});
  }
  j["numeric_checks"] = checks;
  return j.dump(2) + "\n";
}

std::string expr_text(const Expr& e, const JetSpec& spec, ReportFormat f) {
  return render(e, spec, f == ReportFormat::Latex ? Format::Latex : Format::Plain);
}

void write_form(std::ostringstream& os, const std::string& title, const std::string& symbol,
                const std::optional<SourceForm>& form, ReportFormat f) {
  if (!form) {
    os << title << ": skipped\n";
    return;
  }
  os << title << ":\n";
  const auto& spec = *form->spec;
  if (f == ReportFormat::Latex) {
    if (auto abstract = render_abstract(*form)) os << "  " << symbol << "_{\\rho} = " << *abstract << "\n";
  }
  for (std::size_t k = 0; k < form->components.size(); ++k) {
    const std::string name = spec.component_name(static_cast<int>(k));
    os << "  " << (f == ReportFormat::Latex ? symbol + "_{" + std::to_string(k + 1) + "}" : name) << " = "
       << expr_text(form->components[k], spec, f) << "\n";
  }
}

std::string to_text(const Report& r, ReportFormat f) {
  const bool latex = f == ReportFormat::Latex;
  std::ostringstream os;
  os << "command: " << r.command << "\n";
  if (!r.input.empty()) os << "input: " << r.input << "\n";
  os << "seed: " << r.seed << "\n";
  os << "verdict: " << verdict_word(r);
  if (r.verdict) os << " (" << path_word(r) << ")";
  os << "\n";
  if (r.helmholtz) {
    const auto& spec = *r.helmholtz->spec;
    if (r.helmholtz->entries.empty()) {
      os << "helmholtz: all coefficients vanish\n";
    } else {
      os << "helmholtz:\n";
      for (const auto& [key, e] : r.helmholtz->entries) {
        if (latex) {
          std::string sup;
          for (int i : key.J.indices()) sup += (sup.empty() ? "" : " ") + latex_name(spec.bases()[static_cast<std::size_t>(i)]);
          os << "  H_{" << key.sigma + 1 << key.nu + 1 << "}" << (sup.empty() ? "" : "^{" + sup + "}") << " = "
             << render(e, spec, Format::Latex) << "\n";
        } else {
          os << "  H[" << spec.component_name(key.sigma) << ", " << spec.component_name(key.nu);
          if (!key.J.empty()) os << "; " << multi_index_plain(key.J, spec);
          os << "] = " << render(e, spec, Format::Plain) << "\n";
        }
      }
    }
  } else {
    os << "helmholtz: skipped\n";
  }
  auto lagr = [&](const std::string& title, const std::optional<Lagrangian>& L) {
    os << title << ": " << (L ? expr_text(L->density, *L->spec, f) : std::string("skipped")) << "\n";
  };
  lagr("vt_lagrangian", r.vt_lagrangian);
  if (r.reduced_lagrangian) lagr("reduced_lagrangian", r.reduced_lagrangian);
  write_form(os, "euler_lagrange", "E", r.euler_lagrange, f);
  write_form(os, "completion", "\\tau", r.completion, f);
  if (r.completed) write_form(os, "completed", "\\varepsilon", r.completed, f);
  if (r.numeric_checks.empty()) {
    os << "numeric_checks: skipped\n";
  } else {
    os << "numeric_checks:\n";
    for (const auto& c : r.numeric_checks) {
      os << "  " << c.name << ": " << to_string(c.status);
      if (c.status != CheckStatus::Skipped && c.points > 0) {
        os << ", max residual " << format_double(c.max_residual) << " (tol " << format_double(c.tolerance) << ", "
           << c.points << " points)";
      }
      if (!c.note.empty()) os << ", " << c.note;
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Passed:
      return "passed";
    case CheckStatus::Failed:
      return "failed";
    case CheckStatus::Skipped:
      return "skipped";
  }
  return "skipped";
}

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::Json) return to_json(report);
  return to_text(report, format);
}

}  // namespace varcomp
