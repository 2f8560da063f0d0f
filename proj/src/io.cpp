#include "nsnl/io.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "nsnl/config.hpp"
#include "nsnl/errors.hpp"
#include "nsnl/verify.hpp"

namespace nsnl {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot encoding assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view b) : bytes_(b) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw TruncatedPayload("header ends early");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const char* here() const { return bytes_.data() + pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(const char* data, std::size_t len) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in pieces.
  while (len > 0) {
    const std::size_t piece = std::min<std::size_t>(len, 1u << 30);
    c = crc32(c, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(piece));
    data += piece;
    len -= piece;
  }
  return static_cast<std::uint32_t>(c);
}

}  // namespace

double snapshot_mass_ratio(const PhysParams& params) {
  return std::isinf(params.mu) ? 0.0 : params.mass / params.mu;
}

std::string encode_snapshot(const WaveField& wf, double mass_ratio) {
  const Grid& g = wf.grid();
  std::string out = "NSNL";
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dims()));
  for (const Axis& a : g.axes()) {
    put<std::uint64_t>(out, a.n);
    put<double>(out, a.length);
  }
  put<double>(out, wf.time);
  put<double>(out, mass_ratio);
  const std::size_t start = out.size();
  out.resize(start + g.size() * sizeof(cplx));
  std::memcpy(out.data() + start, wf.psi.data(), g.size() * sizeof(cplx));
  put<std::uint32_t>(out, crc(out.data() + start, g.size() * sizeof(cplx)));
  return out;
}

DecodedSnapshot decode_snapshot(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "NSNL") throw BadMagic("not a snapshot");
  Reader r(bytes.substr(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kSnapshotVersion)
    throw VersionMismatch("version " + std::to_string(version) + ", expected " +
                          std::to_string(kSnapshotVersion));
  const auto dims = r.get<std::uint32_t>();
  if (dims < 1 || dims > 2) throw UnsupportedDimension("snapshot has " + std::to_string(dims) + " axes");
  std::vector<AxisSpec> axes;
  std::size_t total = 1;
  for (std::uint32_t d = 0; d < dims; ++d) {
    const auto n = r.get<std::uint64_t>();
    const auto length = r.get<double>();
    if (n == 0 || n > (std::uint64_t{1} << 26)) throw TruncatedPayload("implausible axis size");
    axes.push_back({static_cast<std::size_t>(n), length});
    total *= static_cast<std::size_t>(n);
  }
  const double time = r.get<double>();
  const double ratio = r.get<double>();
  const std::size_t payload = total * sizeof(cplx);
  if (r.remaining() != payload + sizeof(std::uint32_t))
    throw TruncatedPayload("header declares " + std::to_string(total) + " samples but " +
                           std::to_string(r.remaining()) + " bytes follow");
  const char* data = r.here();
  std::uint32_t stored;
  std::memcpy(&stored, data + payload, sizeof stored);
  if (crc(data, payload) != stored) throw ChecksumMismatch("payload checksum differs");

  DecodedSnapshot out{WaveField{ComplexField(make_grid(axes)), time, {}}, ratio};
  std::memcpy(out.state.psi.data(), data, payload);
  return out;
}

void write_snapshot(const std::filesystem::path& path, const WaveField& wf, double mass_ratio) {
  write_text(path, encode_snapshot(wf, mass_ratio));
}

DecodedSnapshot read_snapshot(const std::filesystem::path& path) {
  return decode_snapshot(read_text(path));
}

std::string timeseries_header(std::size_t dims) {
  std::string h = "time\tnorm";
  for (std::size_t d = 0; d < dims; ++d) h += "\tmean_x" + std::to_string(d);
  for (std::size_t d = 0; d < dims; ++d) h += "\twidth" + std::to_string(d);
  h += "\tenergy_linear\tmax_omega\tnonsignaling\tcurrent_linearity\tnorm_drift\n";
  return h;
}

std::string format_timeseries(const Trajectory& traj) {
  const std::size_t dims = traj.grid ? traj.grid->dims() : 1;
  std::string out = timeseries_header(dims);
  if (traj.snapshots.empty()) return out;
  const auto res = snapshot_residuals(traj);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Snapshot& s = traj.snapshots[i];
    std::vector<double> row{s.time, s.obs.norm};
    row.insert(row.end(), s.obs.mean_x.begin(), s.obs.mean_x.end());
    row.insert(row.end(), s.obs.width.begin(), s.obs.width.end());
    row.insert(row.end(), {s.obs.energy_linear, s.max_omega, res[i].nonsignaling,
                           res[i].current_linearity, res[i].norm_drift});
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "\t" : "") + format_double(row[c]);
    out += '\n';
  }
  return out;
}

void write_timeseries(const std::filesystem::path& path, const Trajectory& traj) {
  write_text(path, format_timeseries(traj));
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

OutputLock::OutputLock(const std::filesystem::path& dir) : dir_(dir), lock_(dir / ".nsnl.lock") {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create '" + dir_.string() + "': " + ec.message());
  const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw OutputLocked("'" + dir_.string() + "' is in use (remove " + lock_.string() +
                                 " if no run is active)");
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  std::filesystem::remove(lock_, ec);
}

}  // namespace nsnl
