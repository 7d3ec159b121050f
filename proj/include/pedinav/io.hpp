// CSV interchange: IMU logs in, trajectories / nav solutions / drift tables out.
// Every number is written with 17 significant digits, so a write-read cycle
// reproduces doubles exactly.

#pragma once

#include "pedinav/core.hpp"
#include "pedinav/pdr.hpp"
#include "pedinav/sim.hpp"
#include "pedinav/smins.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pedinav::io {

inline constexpr const char* kImuHeader = "t,fx,fy,fz,wx,wy,wz";
inline constexpr const char* kTrajectoryHeader = "t,x,y";
inline constexpr const char* kNavHeader = "t,px,py,pz,vx,vy,vz,roll,pitch,yaw,stationary";
inline constexpr const char* kTruthHeader = "t,px,py,pz,vx,vy,vz,roll,pitch,yaw";
inline constexpr const char* kMaskHeader = "t,stationary";
inline constexpr const char* kDriftHeader = "t,dp_ins,dp_pdr,dp_smins";

struct Ingested {
  ImuStream stream;
  std::vector<std::string> warnings;
  std::size_t rows = 0;
  double duration = 0.0;  // s
};

/// Reads and validates an IMU log.
///
/// Blank lines are skipped. Malformed rows, non-finite values and timestamps
/// that do not strictly increase raise ValidationError naming the 1-based
/// line. Gaps above 0.5 s, and a median rate more than 5% away from a
/// positive fs_hint, produce warnings.
Ingested ingest_imu_csv(const std::string& path, double fs_hint = 0.0);
Ingested ingest_imu_csv(std::istream& in, const std::string& source = "<stream>", double fs_hint = 0.0);

void write_imu_csv(const std::string& path, const ImuStream& stream);
void write_imu_csv(std::ostream& out, const ImuStream& stream);

void write_trajectory_csv(const std::string& path, const pdr::Trajectory2D& track);
void write_trajectory_csv(std::ostream& out, const pdr::Trajectory2D& track);
pdr::Trajectory2D read_trajectory_csv(const std::string& path);
pdr::Trajectory2D read_trajectory_csv(std::istream& in, const std::string& source = "<stream>");

/// Nav solution with Euler angles (rad) and the stationary flag as 0/1.
void write_nav_csv(const std::string& path, const std::vector<smins::NavState>& states,
                   const std::vector<bool>& stationary);
void write_truth_csv(const std::string& path, const std::vector<smins::NavState>& states);
std::vector<smins::NavState> read_truth_csv(const std::string& path);
std::vector<bool> read_mask_csv(const std::string& path);
void write_mask_csv(const std::string& path, const ImuStream& stream, const std::vector<bool>& mask);
void write_drift_csv(const std::string& path, const std::vector<sim::DriftRow>& rows);

/// "%.17g".
std::string format_double(double v);

}  // namespace pedinav::io
