#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "softgrasp/control/run_loop.hpp"
#include "softgrasp/harness/experiment.hpp"

namespace softgrasp::harness {

/// Mean deformation against time with the settling band shaded and the settle
/// instant marked.
std::string mu_trace_svg(const control::RunRecord& record, const control::ControllerConfig& config,
                         std::optional<double> settle_time_s, const std::string& title);

/// Peak-current box-and-whisker plot, one box per category present.
std::string category_pmc_svg(const std::vector<TrialResult>& trials);

/// Writes plots/<run>.svg for every trial (reading its run record back from
/// output_dir), plus plots/pmc_by_category.svg and .csv.  Throws
/// std::invalid_argument without writing anything when `trials` is empty.
void emit_plots(const std::vector<TrialResult>& trials, const std::filesystem::path& output_dir,
                const control::ControllerConfig& config);

}  // namespace softgrasp::harness
