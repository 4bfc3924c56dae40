#include "mppivs/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifndef MPPIVS_PRESET_DIR
#define MPPIVS_PRESET_DIR "presets"
#endif

namespace mppivs {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + " " + what);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(key, "has the wrong type");
  }
}

Eigen::Vector3d vec3(const json& j, const std::string& key) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) fail(key, "must hold exactly 3 numbers");
  return {v[0], v[1], v[2]};
}

RigidTransform pose_from_json(const json& j, const std::string& key) {
  if (j.is_string()) {
    const std::string which = j.get<std::string>();
    if (which == "c1") return defaults::desired_pose_centered();
    if (which == "c2") return defaults::desired_pose_corner();
    fail(key, "names an unknown pose (expected \"c1\" or \"c2\")");
  }
  if (!j.is_object() || !j.contains("t") || !j.contains("theta_u_deg")) {
    fail(key, "must be \"c1\", \"c2\" or {t, theta_u_deg}");
  }
  return defaults::pose_from_t_theta_u_deg(vec3(j.at("t"), key + ".t"),
                                           vec3(j.at("theta_u_deg"),
                                                key + ".theta_u_deg"));
}

void check_keys(const json& j, const std::string& scope,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(scope.empty() ? item.key() : scope + "." + item.key(),
                     "is not a recognized key");
  }
}

VsSchemeTag scheme_from_string(const std::string& s) {
  if (s == "ibvs") return VsSchemeTag::Ibvs;
  if (s == "3dvs") return VsSchemeTag::ThreeDvs;
  if (s == "pbvs") return VsSchemeTag::Pbvs;
  if (s == "pbvs_aug") return VsSchemeTag::PbvsAugmented;
  fail("scheme", "must be one of ibvs, 3dvs, pbvs, pbvs_aug");
}

ScenarioConfig scenario_from_json(const json& j) {
  check_keys(j, "",
             {"name", "scheme", "controller", "ibvs_case", "desired_pose",
              "initial_pose", "duration_s", "control_rate_hz", "lambda_s",
              "seed", "early_stop", "noise", "calibration", "constraints",
              "control_bounds", "mppi", "q_diag", "tasks", "workspace"});

  const std::string scheme_name = get_or<std::string>(j, "scheme", "ibvs");
  const std::string controller_name =
      get_or<std::string>(j, "controller", "mppi");
  if (controller_name != "mppi" && controller_name != "classical") {
    fail("controller", "must be \"mppi\" or \"classical\"");
  }
  const int case_index = get_or<int>(j, "ibvs_case", 0);
  if (case_index < 0 || case_index > 3) fail("ibvs_case", "must be 0..3");

  ScenarioConfig cfg = make_scenario(
      scheme_from_string(scheme_name),
      controller_name == "mppi" ? ControllerKind::Mppi
                                : ControllerKind::Classical,
      static_cast<IbvsCase>(case_index));

  cfg.name = get_or<std::string>(j, "name", cfg.name);
  if (j.contains("desired_pose")) {
    cfg.desired_pose = pose_from_json(j.at("desired_pose"), "desired_pose");
  }
  if (j.contains("initial_pose")) {
    cfg.initial_pose = pose_from_json(j.at("initial_pose"), "initial_pose");
  }
  cfg.duration = get_or<double>(j, "duration_s", cfg.duration);
  cfg.rate = get_or<double>(j, "control_rate_hz", cfg.rate);
  cfg.lambda_s = get_or<double>(j, "lambda_s", cfg.lambda_s);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.early_stop = get_or<bool>(j, "early_stop", cfg.early_stop);

  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    check_keys(n, "noise", {"pixel_px", "point_m"});
    cfg.noise.pixel = get_or<double>(n, "pixel_px", 0.0);
    cfg.noise.point = get_or<double>(n, "point_m", 0.0);
    if (cfg.noise.pixel < 0.0) fail("noise.pixel_px", "must be >= 0");
    if (cfg.noise.point < 0.0) fail("noise.point_m", "must be >= 0");
  }
  if (j.contains("calibration")) {
    const auto& c = j.at("calibration");
    check_keys(c, "calibration",
               {"f", "rho_u", "rho_v", "u0", "v0", "depth_offset"});
    cfg.calibration.f = get_or<double>(c, "f", 0.0);
    cfg.calibration.rho_u = get_or<double>(c, "rho_u", 0.0);
    cfg.calibration.rho_v = get_or<double>(c, "rho_v", 0.0);
    cfg.calibration.u0 = get_or<double>(c, "u0", 0.0);
    cfg.calibration.v0 = get_or<double>(c, "v0", 0.0);
    cfg.calibration.depth_offset = get_or<double>(c, "depth_offset", 0.0);
  }
  if (j.contains("constraints")) {
    const auto& c = j.at("constraints");
    check_keys(c, "constraints",
               {"pixel_box", "z_max_m", "fov_penalty", "w1", "w2",
                "fov_beta", "fov_alpha"});
    cfg.constraints.pixel_box =
        get_or<bool>(c, "pixel_box", cfg.constraints.pixel_box);
    if (c.contains("z_max_m") && !c.at("z_max_m").is_null()) {
      cfg.constraints.z_max = get_or<double>(c, "z_max_m", 0.0);
    }
    cfg.fov_penalty = get_or<bool>(c, "fov_penalty", false);
    cfg.constraints.w1 = get_or<double>(c, "w1", cfg.constraints.w1);
    cfg.constraints.w2 = get_or<double>(c, "w2", cfg.constraints.w2);
    cfg.constraints.fov_beta =
        get_or<double>(c, "fov_beta", cfg.constraints.fov_beta);
    cfg.constraints.fov_alpha =
        get_or<double>(c, "fov_alpha", cfg.constraints.fov_alpha);
    if (cfg.constraints.w1 <= 0.0) fail("constraints.w1", "must be > 0");
    if (cfg.constraints.w2 <= 0.0) fail("constraints.w2", "must be > 0");
    if (cfg.constraints.fov_beta <= 0.0) fail("constraints.fov_beta", "must be > 0");
    if (cfg.constraints.fov_alpha <= 0.0) fail("constraints.fov_alpha", "must be > 0");
  }
  if (j.contains("control_bounds") && !j.at("control_bounds").is_null()) {
    const auto& b = j.at("control_bounds");
    check_keys(b, "control_bounds", {"v_max_mps", "w_max_radps"});
    const double v = get_or<double>(b, "v_max_mps", 0.5);
    const double w = get_or<double>(b, "w_max_radps", 0.3);
    if (v <= 0.0) fail("control_bounds.v_max_mps", "must be > 0");
    if (w <= 0.0) fail("control_bounds.w_max_radps", "must be > 0");
    cfg.mppi.v_max = defaults::control_bounds(v, w);
    cfg.mppi.v_min = -cfg.mppi.v_max;
  }
  if (j.contains("mppi")) {
    const auto& m = j.at("mppi");
    check_keys(m, "mppi",
               {"samples", "horizon_steps", "lambda", "nu", "sigma_u",
                "threads"});
    cfg.mppi.samples = get_or<int>(m, "samples", cfg.mppi.samples);
    cfg.mppi.horizon_steps =
        get_or<int>(m, "horizon_steps", cfg.mppi.horizon_steps);
    cfg.mppi.lambda = get_or<double>(m, "lambda", cfg.mppi.lambda);
    cfg.mppi.nu = get_or<double>(m, "nu", cfg.mppi.nu);
    cfg.mppi.threads = get_or<int>(m, "threads", cfg.mppi.threads);
    if (m.contains("sigma_u")) {
      const auto v = m.at("sigma_u").get<std::vector<double>>();
      if (v.size() != 6) fail("mppi.sigma_u", "must hold 6 numbers");
      cfg.mppi.sigma_u =
          Eigen::Map<const Eigen::VectorXd>(v.data(), 6).eval();
    }
  }
  if (j.contains("q_diag")) {
    const auto v = j.at("q_diag").get<std::vector<double>>();
    cfg.q_diag = Eigen::Map<const Eigen::VectorXd>(
                     v.data(), static_cast<Eigen::Index>(v.size()))
                     .eval();
  }
  if (cfg.controller == ControllerKind::Mppi) cfg.mppi.validate(6);
  return cfg;
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return j;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

ScenarioConfig scenario_from_json_text(const std::string& text) {
  return scenario_from_json(parse(text));
}

ScenarioConfig scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

SuiteConfig suite_from_json_text(const std::string& text) {
  const json j = parse(text);
  SuiteConfig suite;
  suite.scenario = scenario_from_json(j);
  suite.tasks = get_or<int>(j, "tasks", suite.tasks);
  if (suite.tasks < 1) fail("tasks", "must be >= 1");
  if (j.contains("workspace")) {
    const auto& w = j.at("workspace");
    check_keys(w, "workspace", {"t_min", "t_max", "r_min_deg", "r_max_deg"});
    if (w.contains("t_min")) suite.workspace.t_min = vec3(w.at("t_min"), "workspace.t_min");
    if (w.contains("t_max")) suite.workspace.t_max = vec3(w.at("t_max"), "workspace.t_max");
    if (w.contains("r_min_deg")) {
      suite.workspace.r_min = vec3(w.at("r_min_deg"), "workspace.r_min_deg") * M_PI / 180.0;
    }
    if (w.contains("r_max_deg")) {
      suite.workspace.r_max = vec3(w.at("r_max_deg"), "workspace.r_max_deg") * M_PI / 180.0;
    }
  }
  return suite;
}

SuiteConfig suite_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return suite_from_json_text(ss.str());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (int i = 1; i <= 28; ++i) names.push_back("test" + std::to_string(i));
  return names;
}

std::string preset_path(const std::string& name) {
  std::vector<std::filesystem::path> roots;
  if (const char* env = std::getenv("MPPIVS_PRESET_DIR")) roots.emplace_back(env);
  roots.emplace_back("presets");
  roots.emplace_back(MPPIVS_PRESET_DIR);
  for (const auto& root : roots) {
    const auto candidate = root / (name + ".json");
    if (std::filesystem::exists(candidate)) return candidate.string();
  }
  std::string known;
  for (const auto& n : preset_names()) known += " " + n;
  throw ConfigError("unknown test preset '" + name + "'; known presets:" +
                    known);
}

void write_trajectory_csv(const std::string& path, const TrajectoryLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << "t,u1,u2,u3,u4,v1,v2,v3,v4,Z1,Z2,Z3,Z4,"
         "tx,ty,tz,rux,ruy,ruz,vx,vy,vz,wx,wy,wz,err_norm,jl_flag\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log.pixels[i].size() != 8 || log.depths[i].size() != 4) {
      throw ConfigError("trajectory schema expects exactly 4 features");
    }
    std::string row = format_double(log.t[i]);
    for (int f = 0; f < 4; ++f) row += "," + format_double(log.pixels[i](2 * f));
    for (int f = 0; f < 4; ++f) {
      row += "," + format_double(log.pixels[i](2 * f + 1));
    }
    for (int f = 0; f < 4; ++f) row += "," + format_double(log.depths[i](f));
    for (int k = 0; k < 3; ++k) row += "," + format_double(log.cam_t[i](k));
    for (int k = 0; k < 3; ++k) row += "," + format_double(log.cam_r[i](k));
    for (int k = 0; k < 6; ++k) row += "," + format_double(log.twist[i](k));
    row += "," + format_double(log.err_norm[i]);
    row += log.jl[i] ? ",1\n" : ",0\n";
    out << row;
  }
}

namespace {

json result_to_json(const TaskResult& r) {
  json j;
  j["success"] = r.success;
  j["r_lm"] = r.r_lm;
  j["r_jl"] = r.r_jl;
  j["p_out"] = r.p_out;
  j["mse1"] = r.mse1;
  j["mse2"] = r.mse2;
  j["sim_time_s"] = r.sim_time;
  j["steps"] = r.log.size();
  if (r.convergence_time) {
    j["convergence_time_s"] = *r.convergence_time;
  } else {
    j["convergence_time_s"] = nullptr;
  }
  return j;
}

}  // namespace

void write_result_json(const std::string& path, const std::string& name,
                       const TaskResult& result) {
  json j = result_to_json(result);
  j["name"] = name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

void write_summary_json(const std::string& path, const std::string& name,
                        const SuiteSummary& summary,
                        const std::vector<TaskResult>& results) {
  json j;
  j["name"] = name;
  j["tasks"] = summary.tasks;
  j["n_success"] = summary.n_success;
  j["r_lm"] = summary.r_lm;
  j["r_jl"] = summary.r_jl;
  j["p_out"] = summary.p_out;
  j["success_rate_percent"] = summary.success_rate;
  j["convergence_times_s"] = summary.convergence_times;
  j["results"] = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    json r = result_to_json(results[i]);
    r["task"] = i;
    j["results"].push_back(std::move(r));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty csv file: " + path);
  if (header) {
    header->clear();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mppivs
