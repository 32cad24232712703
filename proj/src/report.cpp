#include "hambif/report.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <variant>

#include <fmt/format.h>
#include <json.hpp>

namespace hambif {

namespace {

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;
using Record = std::vector<Cell>;

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string csv_string(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "null";
        if constexpr (std::is_same_v<T, double>) return format_number(v);
        if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        if constexpr (std::is_same_v<T, std::string>) return json_string(v);
      },
      c);
}

std::string cell_csv(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        if constexpr (std::is_same_v<T, double>) return std::isfinite(v) ? format_number(v) : "";
        if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        if constexpr (std::is_same_v<T, std::string>) return csv_string(v);
      },
      c);
}

void write_records(std::ostream& out, const std::vector<std::string>& fields, const std::vector<Record>& records,
                   OutputFormat format) {
  if (format == OutputFormat::Csv) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
    for (const auto& r : records) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << cell_csv(r[i]);
      out << '\n';
    }
    return;
  }
  for (const auto& r : records) {
    out << '{';
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "," : "") << json_string(fields[i]) << ':' << cell_json(r[i]);
    }
    out << "}\n";
  }
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

Cell criterion_cell(const BifurcationCandidate& c, Criterion k) {
  const auto it = c.criteria.find(k);
  if (it == c.criteria.end()) return std::monostate{};
  return it->second;
}

std::string yes_no(const BifurcationCandidate& c, Criterion k) {
  const auto it = c.criteria.find(k);
  if (it == c.criteria.end()) return "-";
  return it->second ? "yes" : "no";
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : "-"; }

}  // namespace

const std::vector<std::string>& analysis_fields() {
  static const std::vector<std::string> f = {
      "candidate", "j0",        "beta",         "lambda0",      "period",      "multiplicity",
      "nonresonant", "jump",    "degree",       "degree_path",  "zj_signature", "zj_definite",
      "z_definite", "mplus",    "verdict",      "routes",       "reasons"};
  return f;
}

const std::vector<std::string>& branch_fields() {
  static const std::vector<std::string> f = {"step",     "amplitude",    "lambda",
                                             "period",   "residual",     "sup_distance",
                                             "minimal_period_flag", "modes"};
  return f;
}

const std::vector<std::string>& coefficient_fields() {
  static const std::vector<std::string> f = {"step", "k", "component", "a", "b"};
  return f;
}

const std::vector<std::string>& preset_fields() {
  static const std::vector<std::string> f = {"name", "parameter", "default", "description", "config"};
  return f;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

void write_analysis_text(std::ostream& out, const AnalysisReport& report) {
  const auto& z0 = report.equilibrium.z0;
  out << "equilibrium z0 = (";
  for (Eigen::Index i = 0; i < z0.size(); ++i) out << (i ? ", " : "") << fmt::format("{:.12g}", z0[i]);
  out << fmt::format(")  |grad H| = {:.3e}\n", report.equilibrium.gradient_norm);
  for (const auto& d : report.diagnostics) out << "  " << d << '\n';
  if (report.degree.path != DegreePath::None || report.degree.value) {
    out << fmt::format("  degree on section: {} via {}{}\n", opt_int(report.degree.value),
                       to_string(report.degree.path), report.degree.heuristic ? " (heuristic)" : "");
  } else if (!report.degree.note.empty()) {
    out << "  degree on section unavailable: " << report.degree.note << '\n';
  }
  out << '\n';
  out << fmt::format("{:>3} {:>3} {:>14} {:>14} {:>14} {:>5} {:>6} {:>20} {:>5} {:>5} {:>5} {:>5}  {:<22} {}\n", "#",
                     "j0", "beta", "lambda0", "period", "mult", "jump", "degree(path)", "zjS", "zjD", "zD", "m+",
                     "verdict", "routes");
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& c = report.candidates[i];
    const std::string degree = fmt::format("{}({})", opt_int(c.degree_on_section), to_string(c.degree_path));
    out << fmt::format("{:>3} {:>3} {:>14.8g} {:>14.8g} {:>14.8g} {:>5} {:>6} {:>20} {:>5} {:>5} {:>5} {:>5}  {:<22} {}\n",
                       i + 1, c.j0, c.beta, c.lambda0, c.predicted_period, c.multiplicity,
                       opt_int(c.morse_jump), degree, yes_no(c, Criterion::ZjSignature),
                       yes_no(c, Criterion::ZjDefinite), yes_no(c, Criterion::ZDefinite), yes_no(c, Criterion::MPlus),
                       to_string(c.verdict), c.routes.empty() ? "-" : join(c.routes, ","));
    for (const auto& r : c.reasons) out << "      - " << r << '\n';
  }
  out << fmt::format("\n{} candidate(s), {} confirmed\n", report.candidates.size(), report.confirmed_count());
}

void write_analysis_records(std::ostream& out, const AnalysisReport& report, OutputFormat format) {
  if (format == OutputFormat::Text) {
    write_analysis_text(out, report);
    return;
  }
  std::vector<Record> records;
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& c = report.candidates[i];
    Record r;
    r.emplace_back(static_cast<long long>(i + 1));
    r.emplace_back(static_cast<long long>(c.j0));
    r.emplace_back(c.beta);
    r.emplace_back(c.lambda0);
    r.emplace_back(c.predicted_period);
    r.emplace_back(static_cast<long long>(c.multiplicity));
    r.emplace_back(c.nonresonant);
    r.push_back(c.morse_jump ? Cell(static_cast<long long>(*c.morse_jump)) : Cell());
    r.push_back(c.degree_on_section ? Cell(static_cast<long long>(*c.degree_on_section)) : Cell());
    r.emplace_back(std::string(to_string(c.degree_path)));
    r.push_back(criterion_cell(c, Criterion::ZjSignature));
    r.push_back(criterion_cell(c, Criterion::ZjDefinite));
    r.push_back(criterion_cell(c, Criterion::ZDefinite));
    r.push_back(criterion_cell(c, Criterion::MPlus));
    r.emplace_back(std::string(to_string(c.verdict)));
    r.emplace_back(join(c.routes, ";"));
    r.emplace_back(join(c.reasons, ";"));
    records.push_back(std::move(r));
  }
  write_records(out, analysis_fields(), records, format);
}

void write_branch_text(std::ostream& out, const Branch& branch) {
  out << fmt::format("branch from j0 = {}, beta = {:.12g}, predicted period {:.12g}\n", branch.candidate.j0,
                     branch.candidate.beta, branch.candidate.predicted_period);
  out << fmt::format("{:>4} {:>14} {:>20} {:>20} {:>11} {:>14} {:>12} {:>5}\n", "step", "amplitude", "lambda",
                     "period", "residual", "sup_distance", "period_flag", "modes");
  for (std::size_t i = 0; i < branch.orbits.size(); ++i) {
    const auto& o = branch.orbits[i];
    out << fmt::format("{:>4} {:>14.6e} {:>20.15g} {:>20.15g} {:>11.3e} {:>14.6e} {:>12} {:>5}\n", i + 1, o.amplitude,
                       o.lambda, o.period(), o.residual, branch.sup_distance_trend[i].second,
                       to_string(minimal_period_check(o)), o.modes());
  }
}

void write_branch_records(std::ostream& out, const Branch& branch, OutputFormat format) {
  if (format == OutputFormat::Text) {
    write_branch_text(out, branch);
    return;
  }
  std::vector<Record> records;
  for (std::size_t i = 0; i < branch.orbits.size(); ++i) {
    const auto& o = branch.orbits[i];
    records.push_back({Cell(static_cast<long long>(i + 1)), Cell(o.amplitude), Cell(o.lambda), Cell(o.period()),
                       Cell(o.residual), Cell(branch.sup_distance_trend[i].second),
                       Cell(std::string(to_string(minimal_period_check(o)))),
                       Cell(static_cast<long long>(o.modes()))});
  }
  write_records(out, branch_fields(), records, format);
}

void write_coefficient_records(std::ostream& out, const Branch& branch, OutputFormat format) {
  std::vector<Record> records;
  for (std::size_t s = 0; s < branch.orbits.size(); ++s) {
    const auto& o = branch.orbits[s];
    for (int k = 0; k <= o.modes(); ++k) {
      for (int i = 0; i < o.dim(); ++i) {
        const double a = k == 0 ? o.a0[i] : o.a[k - 1][i];
        const double b = k == 0 ? 0.0 : o.b[k - 1][i];
        records.push_back({Cell(static_cast<long long>(s + 1)), Cell(static_cast<long long>(k)),
                           Cell(static_cast<long long>(i + 1)), Cell(a), Cell(b)});
      }
    }
  }
  // Text output of coefficients uses the CSV layout.
  write_records(out, coefficient_fields(), records, format == OutputFormat::Text ? OutputFormat::Csv : format);
}

void write_trend_summary(std::ostream& out, const Branch& branch) {
  const double predicted = branch.candidate.predicted_period;
  if (branch.orbits.empty()) {
    out << "no accepted orbits\n";
  } else {
    const auto& first = branch.period_trend.front();
    out << fmt::format("period at smallest amplitude {:.3e}: {:.15g} (prediction {:.15g}, rel. diff {:.3e})\n",
                       first.first, first.second, predicted, std::abs(first.second - predicted) / predicted);
    if (branch.period_trend.size() >= 2) {
      const auto& second = branch.period_trend[1];
      const double d1 = std::abs(first.second - predicted);
      const double d2 = std::abs(second.second - predicted);
      if (d1 > 0.0 && d2 > 0.0) {
        out << fmt::format("period deviation log-log slope over the first two amplitudes: {:.3f}\n",
                           std::log(d2 / d1) / std::log(second.first / first.first));
      }
    }
    out << fmt::format("sup-distance at smallest amplitude: {:.3e}\n", branch.sup_distance_trend.front().second);
  }
  for (const auto& issue : branch.issues) out << "issue: " << issue << '\n';
  if (branch.failure) out << "failure: " << *branch.failure << '\n';
}

RunConfig preset_default_config(const PresetInfo& info) {
  RunConfig c;
  c.preset = info.name;
  c.params = info.defaults;
  return c;
}

void write_presets(std::ostream& out, OutputFormat format) {
  const auto catalog = preset_catalog();
  if (format == OutputFormat::Text) {
    for (const auto& info : catalog) {
      out << info.name << '\n';
      for (const auto& [k, v] : info.defaults) out << fmt::format("  {} = {}\n", k, v);
      out << "  " << info.description << "\n\n";
    }
    return;
  }
  std::vector<Record> records;
  for (const auto& info : catalog) {
    const std::string config = serialize_config(preset_default_config(info));
    for (const auto& [k, v] : info.defaults) {
      records.push_back({Cell(info.name), Cell(k), Cell(v), Cell(info.description), Cell(config)});
    }
  }
  write_records(out, preset_fields(), records, format);
}

}  // namespace hambif
