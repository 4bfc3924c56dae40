#pragma once

#include <map>
#include <string>
#include <vector>

#include "mppivs/harness.hpp"
#include "mppivs/scenario.hpp"

namespace mppivs {

/// Scenario parsed from a JSON file; unknown keys are rejected so typos fail
/// loudly. Fields absent from the file keep the per-scheme defaults.
ScenarioConfig scenario_from_json_text(const std::string& text);
ScenarioConfig scenario_from_file(const std::string& path);

/// Suite = scenario fields plus `tasks` and an optional `workspace` box.
SuiteConfig suite_from_json_text(const std::string& text);
SuiteConfig suite_from_file(const std::string& path);

/// Named presets (test1 .. test28) resolved against the preset directory:
/// $MPPIVS_PRESET_DIR, ./presets, or the build-time default, in that order.
std::string preset_path(const std::string& name);
std::vector<std::string> preset_names();

/// One row per control step:
/// t,u1..u4,v1..v4,Z1..Z4,tx,ty,tz,rux,ruy,ruz,vx,vy,vz,wx,wy,wz,err_norm,jl_flag
void write_trajectory_csv(const std::string& path, const TrajectoryLog& log);

void write_result_json(const std::string& path, const std::string& name,
                       const TaskResult& result);

void write_summary_json(const std::string& path, const std::string& name,
                        const SuiteSummary& summary,
                        const std::vector<TaskResult>& results);

/// Readers for the artifact's own outputs (schema checks in tests).
std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* header);

}  // namespace mppivs
