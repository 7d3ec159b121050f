#include "pedinav/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace pedinav::config {

namespace {

// Reads typed fields from one JSON object and complains about leftovers.
class Fields {
 public:
  Fields(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ValidationError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(where_ + "." + key + ": wrong type");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    T tmp{};
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    get(key, tmp);
    out = tmp;
  }

  void get_vec3(const char* key, Vec3& out) {
    std::vector<double> v;
    get(key, v);
    if (!obj_.contains(key)) return;
    if (v.size() != 3) throw ValidationError(where_ + "." + key + ": expected three numbers");
    out = Vec3(v[0], v[1], v[2]);
  }

  Json child(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? obj_.at(key) : Json::object();
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  Json obj_;
  std::string where_;
  std::set<std::string> seen_;
};

pdr::HeadingMode parse_heading_mode(const std::string& s) {
  if (s == "ahrs_aligned") return pdr::HeadingMode::ahrs_aligned;
  if (s == "gravity_offset") return pdr::HeadingMode::gravity_offset;
  throw ValidationError("unknown heading_mode '" + s + "' (ahrs_aligned | gravity_offset)");
}

pdr::Gender parse_gender(const std::string& s) {
  if (s == "male") return pdr::Gender::male;
  if (s == "female") return pdr::Gender::female;
  throw ValidationError("unknown gender '" + s + "' (male | female)");
}

smins::SensorErrorModel parse_error_model(const Json& j, const std::string& where) {
  smins::SensorErrorModel m;
  Fields f(j, where);
  f.get("sigma_a", m.sigma_a);
  f.get("sigma_g", m.sigma_g);
  f.get("sigma_ab", m.sigma_ab);
  f.get("sigma_gb", m.sigma_gb);
  f.get_vec3("b_a0", m.b_a0);
  f.get_vec3("b_g0", m.b_g0);
  f.finish();
  m.validate();
  return m;
}

sim::HeadingScript parse_script(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of [t, psi] pairs");
  sim::HeadingScript s;
  for (const auto& knot : j) {
    if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number() || !knot[1].is_number())
      throw ValidationError(where + ": each knot is [t, psi_rad]");
    s.push_back({knot[0].get<double>(), knot[1].get<double>()});
  }
  return s;
}

}  // namespace

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
}

Json section(const Json& doc, const std::string& name) {
  if (doc.is_null()) return Json::object();
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  return doc.contains(name) ? doc.at(name) : Json::object();
}

pdr::StepModel parse_step_model(const std::string& s) {
  if (s == "constant" || s == "sl1") return pdr::StepModel::constant;
  if (s == "weinberg" || s == "sl2") return pdr::StepModel::weinberg;
  if (s == "adaptive" || s == "sl3") return pdr::StepModel::adaptive;
  throw ValidationError("unknown step model '" + s + "' (constant | weinberg | adaptive)");
}

std::string to_string(pdr::StepModel m) {
  switch (m) {
    case pdr::StepModel::constant: return "constant";
    case pdr::StepModel::weinberg: return "weinberg";
    case pdr::StepModel::adaptive: return "adaptive";
  }
  return "?";
}

PdrSection parse_pdr(const Json& section) {
  PdrSection out;
  auto& o = out.options;
  Fields f(section, "pdr");
  {
    Fields d(f.child("detector"), "pdr.detector");
    d.get("min_step_interval", o.detector.min_step_interval);
    d.get("peak_height_factor", o.detector.peak_height_factor);
    d.get("min_peak_height", o.detector.min_peak_height);
    d.finish();
    o.detector.validate();
  }
  std::string model = to_string(o.model);
  f.get("model", model);
  o.model = parse_step_model(model);
  {
    Fields g(f.child("gains"), "pdr.gains");
    g.get("k_c", o.gains.k_c);
    g.get("k_w", o.gains.k_w);
    g.get("k_a1", o.gains.k_a1);
    g.get("k_a2", o.gains.k_a2);
    g.get("k_a3", o.gains.k_a3);
    g.finish();
  }
  f.get("gains_file", out.gains_file);
  f.get("height", o.height);
  std::string gender = "male";
  f.get("gender", gender);
  o.gender = parse_gender(gender);
  std::string heading = "ahrs_aligned";
  f.get("heading_mode", heading);
  o.heading_mode = parse_heading_mode(heading);
  f.get("lpf_cutoff_hz", o.lpf_cutoff_hz);
  {
    Fields i(f.child("init"), "pdr.init");
    i.get("x", o.init.x);
    i.get("y", o.init.y);
    i.get("psi", o.init.psi);
    i.finish();
  }
  f.get("reference_distance", out.reference_distance);
  f.get("reference_track", out.reference_track);
  f.get("fs_hint", out.fs_hint);
  f.finish();
  return out;
}

SminsSection parse_smins(const Json& section) {
  SminsSection out;
  auto& o = out.options;
  Fields f(section, "smins");
  if (f.has("error_model")) o.error_model = parse_error_model(f.child("error_model"), "smins.error_model");
  else f.child("error_model");
  {
    Fields fi(f.child("filter_init"), "smins.filter_init");
    fi.get("sigma_p", o.filter_init.sigma_p);
    fi.get("sigma_v", o.filter_init.sigma_v);
    fi.get("sigma_att", o.filter_init.sigma_att);
    fi.get("sigma_ba", o.filter_init.sigma_ba);
    fi.get("sigma_bg", o.filter_init.sigma_bg);
    fi.finish();
  }
  f.get("sigma_zvu", o.sigma_zvu);
  f.get("sigma_zar", o.sigma_zar);
  {
    Fields z(f.child("zvd"), "smins.zvd");
    z.get("gamma_fmag_min", o.zvd.gamma_fmag_min);
    z.get("gamma_fmag_max", o.zvd.gamma_fmag_max);
    z.get("gamma_sigma_f", o.zvd.gamma_sigma_f);
    z.get("gamma_omega", o.zvd.gamma_omega);
    z.get("window", o.zvd.window);
    z.get("median_window", o.zvd.median_window);
    z.get("printed_inequalities", o.zvd.printed_inequalities);
    z.finish();
    o.zvd.validate();
  }
  {
    Fields a(f.child("aiding"), "smins.aiding");
    a.get("zvu", o.aiding.zvu);
    a.get("zar", o.aiding.zar);
    a.finish();
  }
  {
    Fields i(f.child("init"), "smins.init");
    i.get_vec3("p", o.init.p);
    i.get_vec3("v", o.init.v);
    Vec3 rpy = Vec3::Zero();
    i.get_vec3("rpy", rpy);
    o.init.attitude = (Eigen::AngleAxisd(rpy(2), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy(1), Vec3::UnitY()) *
                       Eigen::AngleAxisd(rpy(0), Vec3::UnitX()))
                          .toRotationMatrix();
    i.finish();
  }
  f.get("g", o.g);
  f.get("reorthogonalize_every", o.reorthogonalize_every);
  f.get("truth", out.truth_file);
  f.get("mask", out.mask_file);
  f.get("use_mask_as_detector", out.use_mask_as_detector);
  f.get("fs_hint", out.fs_hint);
  f.finish();
  if (!(o.sigma_zvu > 0.0) || !(o.sigma_zar > 0.0)) throw ValidationError("smins: measurement STDs must be positive");
  return out;
}

SimSection parse_sim(const Json& section, const sim::Scenario& base) {
  SimSection out;
  out.scenario = base;
  auto& p = out.scenario.profile;
  Fields f(section, "sim");
  f.get("fs", out.scenario.fs);
  f.get("duration", out.scenario.duration);
  {
    Fields g(f.child("profile"), "sim.profile");
    g.get("step_frequency", p.step_frequency);
    g.get("step_length", p.step_length);
    g.get("walk_speed", p.walk_speed);
    g.get("stance_duration", p.stance_duration);
    g.get("swing_peak_accel", p.swing_peak_accel);
    g.get("lead_in", p.lead_in);
    g.get("lead_out", p.lead_out);
    g.get("amplitude_jitter", p.amplitude_jitter);
    g.get("frequency_jitter", p.frequency_jitter);
    g.get("noise_std", p.noise_std);
    g.get("seed", p.seed);
    g.get("lift_height", p.lift_height);
    g.get("twist_rate", p.twist_rate);
    g.get("twist_samples", p.twist_samples);
    g.get("g", p.g);
    Json hs;
    g.get("heading_script", hs);
    if (!hs.is_null()) p.heading_script = parse_script(hs, "sim.profile.heading_script");
    Json ds;
    g.get("device_offset_script", ds);
    if (!ds.is_null()) p.device_offset_script = parse_script(ds, "sim.profile.device_offset_script");
    g.finish();
  }
  if (f.has("sensor_errors")) out.sensor_errors = parse_error_model(f.child("sensor_errors"), "sim.sensor_errors");
  else f.child("sensor_errors");
  f.get("error_seed", out.error_seed);
  f.finish();
  p.validate();
  if (!(out.scenario.fs > 0.0)) throw ValidationError("sim.fs must be positive");
  return out;
}

AssessSection parse_assess(const Json& section) {
  AssessSection out;
  auto& b = out.budget;
  Fields f(section, "assess");
  {
    Fields g(f.child("budget"), "assess.budget");
    g.get("b_a", b.b_a);
    g.get("delta_kw", b.delta_kw);
    g.get("correction_efficiency", b.correction_efficiency);
    g.get("zupt_interval", b.zupt_interval);
    g.get("g", b.g);
    g.get("walk_speed", b.walk_speed);
    std::string mode = "velocity_reset";
    g.get("mode", mode);
    if (mode == "velocity_reset") b.mode = sim::SminsDriftMode::velocity_reset;
    else if (mode == "fractional") b.mode = sim::SminsDriftMode::fractional;
    else throw ValidationError("assess.budget.mode: unknown mode '" + mode + "' (velocity_reset | fractional)");
    g.finish();
  }
  f.get("t_end", out.t_end);
  f.get("t_step", out.t_step);
  f.finish();
  b.validate();
  return out;
}

Json gains_to_json(const pdr::StepLengthGains& g, pdr::StepModel model) {
  return Json{{"model", to_string(model)},
              {"k_c", g.k_c},
              {"k_w", g.k_w},
              {"k_a1", g.k_a1},
              {"k_a2", g.k_a2},
              {"k_a3", g.k_a3}};
}

pdr::StepLengthGains gains_from_json(const Json& j) {
  pdr::StepLengthGains g;
  Fields f(j, "gains");
  std::string model;
  f.get("model", model);
  f.get("k_c", g.k_c);
  f.get("k_w", g.k_w);
  f.get("k_a1", g.k_a1);
  f.get("k_a2", g.k_a2);
  f.get("k_a3", g.k_a3);
  f.finish();
  return g;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace pedinav::config
