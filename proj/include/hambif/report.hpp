#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hambif/analysis.hpp"
#include "hambif/config.hpp"
#include "hambif/orbit.hpp"

namespace hambif {

/// Field order of machine-readable analysis records.
const std::vector<std::string>& analysis_fields();
/// Field order of branch table records.
const std::vector<std::string>& branch_fields();
/// Field order of Fourier coefficient records (one per orbit, mode, component).
const std::vector<std::string>& coefficient_fields();
/// Field order of preset listing records.
const std::vector<std::string>& preset_fields();

/// 17 significant digits; "null" in JSON (empty in CSV) for non-finite values.
std::string format_number(double v);

void write_analysis_text(std::ostream& out, const AnalysisReport& report);
void write_analysis_records(std::ostream& out, const AnalysisReport& report, OutputFormat format);

void write_branch_text(std::ostream& out, const Branch& branch);
void write_branch_records(std::ostream& out, const Branch& branch, OutputFormat format);
void write_coefficient_records(std::ostream& out, const Branch& branch, OutputFormat format);

/// Period limit against the spectral prediction and the sup-distance limit.
void write_trend_summary(std::ostream& out, const Branch& branch);

void write_presets(std::ostream& out, OutputFormat format);

/// Configuration naming `preset` with its default parameters.
RunConfig preset_default_config(const PresetInfo& info);

}  // namespace hambif
