#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "l2n2/types.hpp"

namespace l2n2 {

enum class MatrixFormat { Auto, Delimited, Binary };

/// Leading bytes of the binary point-cloud format. The header is 16 bytes:
/// magic (4), n as uint64 (8), D as uint32 (4), all little-endian, followed by
/// n*D float64 values in row-major order.
inline constexpr char kBinaryMagic[4] = {'L', '2', 'P', 'C'};

struct DelimitedOptions {
  std::optional<char> delimiter;  // unset: split on commas, semicolons, tabs or spaces
  std::optional<bool> header;     // unset: detect from the first non-empty line
};

PointCloud read_delimited(const std::filesystem::path& path, const DelimitedOptions& opts = {});
void write_delimited(const std::filesystem::path& path, const PointCloud& cloud, char delimiter = ',');

PointCloud read_binary(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, const PointCloud& cloud);

/// Auto picks Binary when the file starts with the magic bytes.
MatrixFormat detect_format(const std::filesystem::path& path);

struct IngestOptions {
  MatrixFormat format = MatrixFormat::Auto;
  DelimitedOptions delimited;
  std::optional<Index> subsample;  // keep this many rows, drawn without replacement
  std::uint64_t seed = 0;
};

/// Reads and validates a numeric matrix (finite, n >= 2, D >= 1).
PointCloud ingest_matrix(const std::filesystem::path& path, const IngestOptions& opts = {});

/// Writes in the format implied by the extension: ".bin" gives binary,
/// anything else comma-delimited text.
void write_matrix(const std::filesystem::path& path, const PointCloud& cloud);

/// Rows `rows` of `cloud`, in the given order.
PointCloud select_rows(const PointCloud& cloud, const std::vector<Index>& rows);

}  // namespace l2n2
