#pragma once

// Binary snapshot format (little-endian):
//
//   offset  size  field
//   0       4     magic "SGRD"
//   4       4     format version (uint32) = 1
//   8       1     dim (uint8)
//   9       3     zero
//   12      4     bins per dim M (uint32)
//   16      8     half width L (float64)
//   24      8     time t (float64)
//   32      1     producer (uint8): 0 = SGIP, 1 = FDM
//   33      31    zero
//   64      8*M^d values (float64), row-major, axis 0 slowest
//
// Diagnostics CSV: a "# sgip-diag v1" line, then the header
// "step,time,total_mass" (plus ",front_x" when front tracking is on).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgip/core.hpp"
#include "sgip/driver.hpp"

namespace sgip {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 64;

enum class Producer : std::uint8_t { SGIP = 0, FDM = 1 };

std::string producer_name(Producer p);

class SnapshotError : public Error {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, Truncated, Malformed };
  SnapshotError(Kind kind, const std::string& what) : Error(what), kind(kind) {}
  Kind kind;
};

struct Snapshot {
  DensityField field;
  Producer producer = Producer::SGIP;
};

std::vector<std::uint8_t> encode_snapshot(const DensityField& field, Producer producer);
Snapshot decode_snapshot(std::span<const std::uint8_t> bytes);

void write_snapshot(const DensityField& field, Producer producer, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

/// "snap_000012.sgrd".
std::string snapshot_filename(std::uint64_t step);

void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRow> rows, bool with_front);

}  // namespace sgip
