#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "nsnl/dynamics.hpp"

namespace nsnl {

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Binary snapshot, little-endian:
///   "NSNL" | u32 version | u32 dims | dims x (u64 n, f64 length)
///   | f64 time | f64 mass_ratio | n_total x (f64 re, f64 im) | u32 crc32
/// The checksum covers the complex payload only. mass_ratio is M/mu, 0 for
/// the linear limit.
std::string encode_snapshot(const WaveField& wf, double mass_ratio);

struct DecodedSnapshot {
  WaveField state;
  double mass_ratio = 0.0;
};

/// Throws BadMagic, VersionMismatch, TruncatedPayload (size disagrees with
/// the header) and ChecksumMismatch.
DecodedSnapshot decode_snapshot(std::string_view bytes);

void write_snapshot(const std::filesystem::path& path, const WaveField& wf, double mass_ratio);
DecodedSnapshot read_snapshot(const std::filesystem::path& path);

/// M/mu of a parameter set, 0 when mu is infinite.
double snapshot_mass_ratio(const PhysParams& params);

/// Tab-separated, one header row and one row per snapshot. Columns:
/// time, norm, mean_x<d>, width<d>, energy_linear, max_omega, nonsignaling,
/// current_linearity, norm_drift (7 + 2 dims in total).
std::string timeseries_header(std::size_t dims);
std::string format_timeseries(const Trajectory& traj);
void write_timeseries(const std::filesystem::path& path, const Trajectory& traj);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Exclusive claim on an output directory, released on destruction. Creates
/// the directory if needed. Throws OutputLocked when another writer holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::filesystem::path lock_;
};

}  // namespace nsnl
