#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "varcomp/render.hpp"
#include "varcomp/variational.hpp"

namespace varcomp {

enum class CheckStatus : std::uint8_t { Passed, Failed, Skipped };

struct NumericCheck {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  int points = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::string note;
};

/// Everything a command produced. Absent sections render as "skipped".
struct Report {
  std::string command;
  std::string input;
  std::uint64_t seed = 0;
  std::shared_ptr<const JetSpec> spec;
  std::optional<Verdict> verdict;
  std::optional<HelmholtzTensor> helmholtz;
  std::optional<Lagrangian> vt_lagrangian;
  std::optional<Lagrangian> reduced_lagrangian;
  std::optional<SourceForm> euler_lagrange;
  std::optional<SourceForm> completion;
  std::optional<SourceForm> completed;
  std::vector<NumericCheck> numeric_checks;
};

enum class ReportFormat : std::uint8_t { Plain, Latex, Json };

/// Deterministic: equal reports give byte-identical output.
std::string render_report(const Report& report, ReportFormat format);

std::string to_string(CheckStatus status);

}  // namespace varcomp
