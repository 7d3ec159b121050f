// Python bindings. IMU streams cross the boundary as float64 arrays of shape
// (N, 7) with columns t, fx, fy, fz, wx, wy, wz.

#include "pedinav/metrics.hpp"
#include "pedinav/pdr.hpp"
#include "pedinav/sim.hpp"
#include "pedinav/smins.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pedinav;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImuStream to_stream(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 7) throw ValidationError("IMU array must have shape (N, 7)");
  auto r = a.unchecked<2>();
  ImuStream s(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t k = 0; k < a.shape(0); ++k) {
    auto& smp = s[static_cast<std::size_t>(k)];
    smp.t = r(k, 0);
    smp.f = Vec3(r(k, 1), r(k, 2), r(k, 3));
    smp.w = Vec3(r(k, 4), r(k, 5), r(k, 6));
  }
  return s;
}

Array from_stream(const ImuStream& s) {
  Array a({static_cast<py::ssize_t>(s.size()), py::ssize_t{7}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto i = static_cast<py::ssize_t>(k);
    w(i, 0) = s[k].t;
    for (int j = 0; j < 3; ++j) {
      w(i, 1 + j) = s[k].f(j);
      w(i, 4 + j) = s[k].w(j);
    }
  }
  return a;
}

Array from_track(const pdr::Trajectory2D& t) {
  Array a({static_cast<py::ssize_t>(t.size()), py::ssize_t{3}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto i = static_cast<py::ssize_t>(k);
    w(i, 0) = t[k].t;
    w(i, 1) = t[k].x;
    w(i, 2) = t[k].y;
  }
  return a;
}

Array rows_of(const std::vector<smins::NavState>& states, bool velocity) {
  Array a({static_cast<py::ssize_t>(states.size()), py::ssize_t{3}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t k = 0; k < states.size(); ++k)
    for (int j = 0; j < 3; ++j) w(static_cast<py::ssize_t>(k), j) = velocity ? states[k].v(j) : states[k].p(j);
  return a;
}

pdr::StepDetectorConfig detector(double min_interval, double factor, double floor) {
  pdr::StepDetectorConfig c;
  c.min_step_interval = min_interval;
  c.peak_height_factor = factor;
  c.min_peak_height = floor;
  return c;
}

py::dict step_dict(const std::vector<pdr::StepEvent>& steps) {
  std::vector<std::size_t> index;
  std::vector<double> t, fmax, fmin, sf, sigma;
  for (const auto& s : steps) {
    index.push_back(s.index);
    t.push_back(s.t_peak);
    fmax.push_back(s.f_mag_max);
    fmin.push_back(s.f_mag_min);
    sf.push_back(s.step_frequency);
    sigma.push_back(s.sigma_f);
  }
  py::dict d;
  d["index"] = index;
  d["t_peak"] = t;
  d["f_mag_max"] = fmax;
  d["f_mag_min"] = fmin;
  d["step_frequency"] = sf;
  d["sigma_f"] = sigma;
  return d;
}

pdr::StepModel model_of(const std::string& m) {
  if (m == "constant") return pdr::StepModel::constant;
  if (m == "weinberg") return pdr::StepModel::weinberg;
  if (m == "adaptive") return pdr::StepModel::adaptive;
  throw ValidationError("model must be constant, weinberg or adaptive");
}

sim::Scenario scenario_of(const std::string& name) {
  if (name == "golden") return sim::golden_texting_walk();
  if (name == "four_segment") return sim::four_segment_heading_walk();
  if (name == "foot") return sim::foot_stride_walk();
  throw ValidationError("scenario must be golden, four_segment or foot");
}

}  // namespace

PYBIND11_MODULE(_pedinav, m) {
  m.doc() = "Pedestrian dead reckoning and shoe-mounted INS";

  static py::exception<ValidationError> validation(m, "ValidationError", PyExc_ValueError);
  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical, e.what());
    }
  });

  m.def(
      "detect_steps",
      [](const Array& imu, double min_step_interval, double peak_height_factor, double min_peak_height) {
        return step_dict(
            pdr::detect_steps(to_stream(imu), detector(min_step_interval, peak_height_factor, min_peak_height))
                .steps);
      },
      py::arg("imu"), py::arg("min_step_interval") = 0.3, py::arg("peak_height_factor") = 1.5,
      py::arg("min_peak_height") = 0.5, "Detected steps as a dict of per-step lists.");

  m.def(
      "calibrate",
      [](const Array& imu, double known_distance, const std::string& model) {
        const auto det = pdr::detect_steps(to_stream(imu));
        const auto cal = pdr::calibrate_gains(det.steps, known_distance, model_of(model));
        py::dict d;
        d["k_w"] = cal.gains.k_w;
        d["k_a1"] = cal.gains.k_a1;
        d["k_a2"] = cal.gains.k_a2;
        d["k_a3"] = cal.gains.k_a3;
        d["rank"] = cal.rank;
        return d;
      },
      py::arg("imu"), py::arg("known_distance"), py::arg("model") = "weinberg");

  m.def(
      "run_pdr",
      [](const Array& imu, const std::string& model, double k_w, std::vector<double> adaptive, double height,
         const std::string& gender, const std::string& heading_mode, double x0, double y0, double psi0,
         double peak_height_factor) {
        pdr::PdrOptions o;
        o.model = model_of(model);
        o.gains.k_w = k_w;
        if (!adaptive.empty()) {
          if (adaptive.size() != 3) throw ValidationError("adaptive gains are [k_a1, k_a2, k_a3]");
          o.gains.k_a1 = adaptive[0];
          o.gains.k_a2 = adaptive[1];
          o.gains.k_a3 = adaptive[2];
        }
        o.height = height;
        o.gender = gender == "female" ? pdr::Gender::female : pdr::Gender::male;
        if (heading_mode == "ahrs_aligned") o.heading_mode = pdr::HeadingMode::ahrs_aligned;
        else if (heading_mode == "gravity_offset") o.heading_mode = pdr::HeadingMode::gravity_offset;
        else throw ValidationError("heading_mode must be ahrs_aligned or gravity_offset");
        o.init = {x0, y0, psi0};
        o.detector.peak_height_factor = peak_height_factor;
        const auto res = pdr::run_pdr(to_stream(imu), o);
        std::vector<double> lengths, headings;
        for (const auto& s : res.steps) {
          lengths.push_back(s.length);
          headings.push_back(s.heading);
        }
        py::dict d;
        d["track"] = from_track(res.track);
        d["step_lengths"] = lengths;
        d["headings"] = headings;
        d["distance"] = res.distance();
        d["warnings"] = res.warnings;
        return d;
      },
      py::arg("imu"), py::arg("model") = "weinberg", py::arg("k_w") = 0.0, py::arg("adaptive_gains") = std::vector<double>{},
      py::arg("height") = 1.75, py::arg("gender") = "male", py::arg("heading_mode") = "ahrs_aligned",
      py::arg("x0") = 0.0, py::arg("y0") = 0.0, py::arg("psi0") = 0.0, py::arg("peak_height_factor") = 1.5);

  m.def(
      "detect_zero_velocity", [](const Array& imu) { return smins::detect_zero_velocity(to_stream(imu)); },
      py::arg("imu"), "Per-sample stationary flags from the three-condition detector.");

  m.def(
      "run_smins",
      [](const Array& imu, bool zvu, bool zar, std::optional<std::vector<bool>> stationary) {
        smins::SminsOptions o;
        o.aiding.zvu = zvu;
        o.aiding.zar = zar;
        o.stationary_override = std::move(stationary);
        const auto res = smins::run_smins(to_stream(imu), o);
        py::dict d;
        d["position"] = rows_of(res.states, false);
        d["velocity"] = rows_of(res.states, true);
        d["stationary"] = res.stationary;
        d["covariance_ok"] = res.covariance_ok;
        return d;
      },
      py::arg("imu"), py::arg("zvu") = true, py::arg("zar") = false, py::arg("stationary") = py::none());

  m.def(
      "simulate_gait",
      [](const std::string& scenario, std::optional<std::uint64_t> seed) {
        sim::Scenario s = scenario_of(scenario);
        if (seed) s.profile.seed = *seed;
        const auto w = sim::generate_handheld_walk(s.profile, s.fs, s.duration);
        py::dict d;
        d["imu"] = from_stream(w.stream);
        d["truth_track"] = from_track(w.truth);
        d["step_lengths"] = w.step_lengths;
        d["psi_user"] = w.psi_user;
        d["psi_device"] = w.psi_device;
        return d;
      },
      py::arg("scenario") = "golden", py::arg("seed") = py::none());

  m.def(
      "simulate_foot",
      [](double duration, double fs, double bias_mg) {
        sim::Scenario s = sim::foot_stride_walk();
        const auto w = sim::generate_foot_mounted_walk(s.profile, fs, duration);
        smins::SensorErrorModel e;
        e.b_a0 = Vec3(bias_mg * 1e-3 * s.profile.g, 0.0, 0.0);
        py::dict d;
        d["imu"] = from_stream(sim::inject_sensor_errors(w.stream, e, 1));
        d["truth_position"] = rows_of(w.truth, false);
        d["stance"] = w.stance;
        return d;
      },
      py::arg("duration") = 30.0, py::arg("fs") = 100.0, py::arg("bias_mg") = 0.0);

  m.def(
      "assess_drift",
      [](double t, double b_a, double g, double delta_kw, double walk_speed, double zupt_interval) {
        sim::ErrorBudget b;
        b.b_a = b_a;
        b.g = g;
        b.delta_kw = delta_kw;
        b.walk_speed = walk_speed;
        b.zupt_interval = zupt_interval;
        return py::make_tuple(sim::assess_ins_drift(b, t), sim::assess_pdr_drift(b, t), sim::assess_smins_drift(b, t));
      },
      py::arg("t"), py::arg("b_a") = 0.005, py::arg("g") = 10.0, py::arg("delta_kw") = 0.05,
      py::arg("walk_speed") = 2.0, py::arg("zupt_interval") = 1.0,
      "(INS, PDR, SM-INS) position drift in metres after t seconds.");

  m.def("heading_error_circular", [](std::vector<double> est, std::vector<double> ref) {
    return metrics::heading_error_circular(est, ref);
  });
}
