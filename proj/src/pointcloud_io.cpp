#include "l2n2/pointcloud_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "l2n2/random.hpp"

namespace l2n2 {

static_assert(std::endian::native == std::endian::little,
              "binary point-cloud I/O assumes a little-endian host");

namespace {

std::vector<std::string_view> split_fields(std::string_view line, std::optional<char> delimiter) {
  std::vector<std::string_view> fields;
  auto is_sep = [&](char c) {
    if (delimiter) return c == *delimiter;
    return c == ',' || c == ';' || c == '\t' || c == ' ';
  };
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = pos;
    while (end < line.size() && !is_sep(line[end])) ++end;
    std::string_view field = line.substr(pos, end - pos);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    // Runs of whitespace separate a single field boundary.
    if (!field.empty() || delimiter) fields.push_back(field);
    pos = end + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

PointCloud read_delimited(const std::filesystem::path& path, const DelimitedOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line) || line.front() == '#') continue;
    const auto fields = split_fields(line, opts.delimiter);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t c = 0; c < fields.size(); ++c) numeric &= parse_double(fields[c], row[c]);

    if (first) {
      first = false;
      const bool header = opts.header.value_or(!numeric);
      if (header) continue;
    }
    if (!numeric)
      throw Error(ErrorCode::InvalidData, path.string() + ":" + std::to_string(line_no) +
                                              ": non-numeric field in data row " +
                                              std::to_string(rows));
    if (cols < 0) cols = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != cols)
      throw Error(ErrorCode::InvalidData, path.string() + ":" + std::to_string(line_no) +
                                              ": expected " + std::to_string(cols) +
                                              " fields, found " + std::to_string(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c)
      if (!std::isfinite(row[c]))
        throw Error(ErrorCode::InvalidData,
                    "non-finite value in row " + std::to_string(rows) + " (line " +
                        std::to_string(line_no) + ")");
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::InvalidData, path.string() + " holds no data rows");
  return Eigen::Map<const PointCloud>(values.data(), rows, cols);
}

void write_delimited(const std::filesystem::path& path, const PointCloud& cloud, char delimiter) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  char buf[32];
  for (Index i = 0; i < cloud.rows(); ++i) {
    for (Index c = 0; c < cloud.cols(); ++c) {
      if (c) out << delimiter;
      const auto res = std::to_chars(buf, buf + sizeof buf, cloud(i, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

PointCloud read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  char magic[4];
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0)
    throw Error(ErrorCode::FormatError, path.string() + " is not a binary point cloud");
  if (n > (std::uint64_t{1} << 40) / std::max<std::uint32_t>(d, 1))
    throw Error(ErrorCode::FormatError, path.string() + ": implausible size in header");

  PointCloud cloud(static_cast<Index>(n), static_cast<Index>(d));
  in.read(reinterpret_cast<char*>(cloud.data()),
          static_cast<std::streamsize>(n * d * sizeof(double)));
  if (!in)
    throw Error(ErrorCode::FormatError, path.string() + ": truncated payload, expected " +
                                            std::to_string(n) + "x" + std::to_string(d));
  return cloud;
}

void write_binary(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  const std::uint64_t n = static_cast<std::uint64_t>(cloud.rows());
  const std::uint32_t d = static_cast<std::uint32_t>(cloud.cols());
  out.write(kBinaryMagic, 4);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  out.write(reinterpret_cast<const char*>(cloud.data()),
            static_cast<std::streamsize>(n * d * sizeof(double)));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

MatrixFormat detect_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::memcmp(magic, kBinaryMagic, 4) == 0 ? MatrixFormat::Binary
                                                         : MatrixFormat::Delimited;
}

PointCloud select_rows(const PointCloud& cloud, const std::vector<Index>& rows) {
  PointCloud out(static_cast<Index>(rows.size()), cloud.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = cloud.row(rows[r]);
  return out;
}

PointCloud ingest_matrix(const std::filesystem::path& path, const IngestOptions& opts) {
  MatrixFormat format = opts.format;
  if (format == MatrixFormat::Auto) format = detect_format(path);
  PointCloud cloud =
      format == MatrixFormat::Binary ? read_binary(path) : read_delimited(path, opts.delimited);
  validate_cloud(cloud);
  if (opts.subsample) {
    if (*opts.subsample < 2 || *opts.subsample > cloud.rows())
      throw Error(ErrorCode::InvalidArgument,
                  "subsample size " + std::to_string(*opts.subsample) + " outside [2, " +
                      std::to_string(cloud.rows()) + "]");
    Rng rng(opts.seed);
    cloud = select_rows(cloud, sample_indices<Index>(cloud.rows(), *opts.subsample, rng));
  }
  return cloud;
}

void write_matrix(const std::filesystem::path& path, const PointCloud& cloud) {
  if (path.extension() == ".bin")
    write_binary(path, cloud);
  else
    write_delimited(path, cloud);
}

}  // namespace l2n2
