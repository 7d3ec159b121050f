#include "pedinav/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pedinav::io {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw ValidationError(msg.str());
}

double parse_number(const std::string& cell, const std::string& source, std::size_t line) {
  if (cell.empty()) fail(source, line, "empty field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE) fail(source, line, "cannot parse '" + cell + "'");
  if (!std::isfinite(v)) fail(source, line, "non-finite value '" + cell + "'");
  return v;
}

/// Reads the header and the numeric rows of a fixed-width CSV.
std::vector<std::pair<std::size_t, std::vector<double>>> read_table(std::istream& in, const std::string& source,
                                                                      const std::string& header) {
  const std::size_t width = split(header).size();
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!have_header) {
      std::string compact;
      for (const auto& c : split(line)) compact += (compact.empty() ? "" : ",") + c;
      if (compact != header) fail(source, lineno, "expected header '" + header + "'");
      have_header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != width) {
      std::ostringstream msg;
      msg << "expected " << width << " fields, found " << cells.size();
      fail(source, lineno, msg.str());
    }
    std::vector<double> values;
    values.reserve(width);
    for (const auto& c : cells) values.push_back(parse_number(c, source, lineno));
    rows.emplace_back(lineno, std::move(values));
  }
  if (!have_header) fail(source, lineno == 0 ? 1 : lineno, "missing header '" + header + "'");
  return rows;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return in;
}

void write_state_row(std::ostream& out, const smins::NavState& s) {
  const Vec3 e = s.euler();
  out << format_double(s.t);
  for (int i = 0; i < 3; ++i) out << ',' << format_double(s.p(i));
  for (int i = 0; i < 3; ++i) out << ',' << format_double(s.v(i));
  for (int i = 0; i < 3; ++i) out << ',' << format_double(e(i));
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Ingested ingest_imu_csv(std::istream& in, const std::string& source, double fs_hint) {
  Ingested out;
  const auto rows = read_table(in, source, kImuHeader);
  out.stream.reserve(rows.size());
  for (const auto& [line, v] : rows) {
    if (!out.stream.empty() && !(v[0] > out.stream.back().t)) {
      std::ostringstream msg;
      msg << (v[0] == out.stream.back().t ? "duplicate" : "non-monotone") << " timestamp " << format_double(v[0])
          << " (previous " << format_double(out.stream.back().t) << ")";
      fail(source, line, msg.str());
    }
    if (!out.stream.empty() && v[0] - out.stream.back().t > 0.5) {
      std::ostringstream msg;
      msg << source << ":" << line << ": sampling gap of " << v[0] - out.stream.back().t << " s";
      out.warnings.push_back(msg.str());
    }
    out.stream.push_back({v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])});
  }
  out.rows = out.stream.size();
  out.duration = out.stream.empty() ? 0.0 : out.stream.back().t - out.stream.front().t;
  if (fs_hint > 0.0 && out.stream.size() > 1) {
    std::vector<double> dts;
    for (std::size_t k = 1; k < out.stream.size(); ++k) dts.push_back(out.stream[k].t - out.stream[k - 1].t);
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    const double fs = 1.0 / dts[dts.size() / 2];
    if (std::abs(fs - fs_hint) > 0.05 * fs_hint) {
      std::ostringstream msg;
      msg << "median sampling rate " << fs << " Hz differs from the hint " << fs_hint << " Hz";
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

Ingested ingest_imu_csv(const std::string& path, double fs_hint) {
  auto in = open_in(path);
  return ingest_imu_csv(in, path, fs_hint);
}

void write_imu_csv(std::ostream& out, const ImuStream& stream) {
  out << kImuHeader << '\n';
  for (const auto& s : stream) {
    out << format_double(s.t);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(s.f(i));
    for (int i = 0; i < 3; ++i) out << ',' << format_double(s.w(i));
    out << '\n';
  }
}

void write_imu_csv(const std::string& path, const ImuStream& stream) {
  auto out = open_out(path);
  write_imu_csv(out, stream);
}

void write_trajectory_csv(std::ostream& out, const pdr::Trajectory2D& track) {
  out << kTrajectoryHeader << '\n';
  for (const auto& p : track) out << format_double(p.t) << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

void write_trajectory_csv(const std::string& path, const pdr::Trajectory2D& track) {
  auto out = open_out(path);
  write_trajectory_csv(out, track);
}

pdr::Trajectory2D read_trajectory_csv(std::istream& in, const std::string& source) {
  pdr::Trajectory2D track;
  for (const auto& [line, v] : read_table(in, source, kTrajectoryHeader)) track.push_back({v[0], v[1], v[2]});
  return track;
}

pdr::Trajectory2D read_trajectory_csv(const std::string& path) {
  auto in = open_in(path);
  return read_trajectory_csv(in, path);
}

void write_nav_csv(const std::string& path, const std::vector<smins::NavState>& states,
                   const std::vector<bool>& stationary) {
  if (stationary.size() != states.size()) throw ValidationError("stationary flags do not match the states");
  auto out = open_out(path);
  out << kNavHeader << '\n';
  for (std::size_t k = 0; k < states.size(); ++k) {
    write_state_row(out, states[k]);
    out << ',' << (stationary[k] ? 1 : 0) << '\n';
  }
}

void write_truth_csv(const std::string& path, const std::vector<smins::NavState>& states) {
  auto out = open_out(path);
  out << kTruthHeader << '\n';
  for (const auto& s : states) {
    write_state_row(out, s);
    out << '\n';
  }
}

std::vector<smins::NavState> read_truth_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<smins::NavState> out;
  for (const auto& [line, v] : read_table(in, path, kTruthHeader)) {
    smins::NavState s;
    s.t = v[0];
    s.p = Vec3(v[1], v[2], v[3]);
    s.v = Vec3(v[4], v[5], v[6]);
    s.attitude = (Eigen::AngleAxisd(v[9], Vec3::UnitZ()) * Eigen::AngleAxisd(v[8], Vec3::UnitY()) *
                  Eigen::AngleAxisd(v[7], Vec3::UnitX()))
                     .toRotationMatrix();
    out.push_back(s);
  }
  return out;
}

std::vector<bool> read_mask_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<bool> out;
  for (const auto& [line, v] : read_table(in, path, kMaskHeader)) {
    if (v[1] != 0.0 && v[1] != 1.0) fail(path, line, "stationary flag must be 0 or 1");
    out.push_back(v[1] == 1.0);
  }
  return out;
}

void write_mask_csv(const std::string& path, const ImuStream& stream, const std::vector<bool>& mask) {
  if (mask.size() != stream.size()) throw ValidationError("mask does not match the stream");
  auto out = open_out(path);
  out << kMaskHeader << '\n';
  for (std::size_t k = 0; k < stream.size(); ++k) out << format_double(stream[k].t) << ',' << (mask[k] ? 1 : 0) << '\n';
}

void write_drift_csv(const std::string& path, const std::vector<sim::DriftRow>& rows) {
  auto out = open_out(path);
  out << kDriftHeader << '\n';
  for (const auto& r : rows)
    out << format_double(r.t) << ',' << format_double(r.ins) << ',' << format_double(r.pdr) << ','
        << format_double(r.smins) << '\n';
}

}  // namespace pedinav::io
