#include "sgip/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sgip {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

std::string producer_name(Producer p) { return p == Producer::FDM ? "FDM" : "SGIP"; }

namespace {

template <class T>
void put(std::vector<std::uint8_t>& buf, std::size_t offset, T value) {
  std::memcpy(buf.data() + offset, &value, sizeof(T));
}

template <class T>
T get(std::span<const std::uint8_t> buf, std::size_t offset) {
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const DensityField& field, Producer producer) {
  const std::size_t payload = 8 * field.values.size();
  std::vector<std::uint8_t> buf(kSnapshotHeaderBytes + payload, 0);
  std::memcpy(buf.data(), "SGRD", 4);
  put<std::uint32_t>(buf, 4, kSnapshotVersion);
  put<std::uint8_t>(buf, 8, static_cast<std::uint8_t>(field.grid.dim()));
  put<std::uint32_t>(buf, 12, static_cast<std::uint32_t>(field.grid.bins_per_dim()));
  put<double>(buf, 16, field.grid.half_width());
  put<double>(buf, 24, field.time);
  put<std::uint8_t>(buf, 32, static_cast<std::uint8_t>(producer));
  std::memcpy(buf.data() + kSnapshotHeaderBytes, field.values.data(), payload);
  return buf;
}

Snapshot decode_snapshot(std::span<const std::uint8_t> bytes) {
  using Kind = SnapshotError::Kind;
  if (bytes.size() < kSnapshotHeaderBytes) throw SnapshotError(Kind::Truncated, "snapshot: header shorter than 64 bytes");
  if (std::memcmp(bytes.data(), "SGRD", 4) != 0) throw SnapshotError(Kind::BadMagic, "snapshot: bad magic");
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kSnapshotVersion)
    throw SnapshotError(Kind::VersionMismatch, "snapshot: unsupported format version " + std::to_string(version));
  const int dim = get<std::uint8_t>(bytes, 8);
  const auto bins = get<std::uint32_t>(bytes, 12);
  const double L = get<double>(bytes, 16);
  const double t = get<double>(bytes, 24);
  const auto producer = get<std::uint8_t>(bytes, 32);
  if (producer > 1) throw SnapshotError(Kind::Malformed, "snapshot: unknown producer tag");
  std::optional<GridSpec> grid;
  try {
    grid.emplace(dim, L, static_cast<std::int64_t>(bins));
  } catch (const Error& e) {
    throw SnapshotError(Kind::Malformed, std::string("snapshot: invalid grid: ") + e.what());
  }
  const std::size_t payload = 8 * grid->num_bins();
  if (bytes.size() - kSnapshotHeaderBytes < payload)
    throw SnapshotError(Kind::Truncated, "snapshot: payload shorter than 8*M^d bytes");
  if (bytes.size() - kSnapshotHeaderBytes > payload)
    throw SnapshotError(Kind::Malformed, "snapshot: trailing bytes after payload");
  std::vector<double> values(grid->num_bins());
  std::memcpy(values.data(), bytes.data() + kSnapshotHeaderBytes, payload);
  return Snapshot{DensityField(*grid, std::move(values), t), static_cast<Producer>(producer)};
}

void write_snapshot(const DensityField& field, Producer producer, const std::filesystem::path& path) {
  const auto buf = encode_snapshot(field, producer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError(SnapshotError::Kind::Io, "snapshot: cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  out.close();
  if (!out) throw SnapshotError(SnapshotError::Kind::Io, "snapshot: write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError(SnapshotError::Kind::Io, "snapshot: cannot open " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(buf);
}

std::string snapshot_filename(std::uint64_t step) {
  std::ostringstream name;
  name << "snap_" << std::setw(6) << std::setfill('0') << step << ".sgrd";
  return name.str();
}

void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRow> rows, bool with_front) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("diagnostics: cannot open " + path.string());
  out << "# sgip-diag v1\n";
  out << (with_front ? "step,time,total_mass,front_x\n" : "step,time,total_mass\n");
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.step << ',' << r.time << ',' << r.total_mass;
    if (with_front) {
      out << ',';
      if (r.front_x)
        out << *r.front_x;
      else
        out << "nan";
    }
    out << '\n';
  }
}

}  // namespace sgip
