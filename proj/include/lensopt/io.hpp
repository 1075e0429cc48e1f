#pragma once

#include "lensopt/grid.hpp"
#include "lensopt/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lensopt {

/// File could not be opened, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One nodal field read back from a snapshot.
struct FieldFile {
  std::string name;
  int nx = 0;
  int ny = 0;
  Scalar hx = 0;
  Scalar hy = 0;
  Vector values;
};

/// Legacy ASCII VTK structured-points snapshot, values printed with 17
/// significant digits so read_field reproduces them bit for bit.
void write_field(const std::filesystem::path& path, const Grid& grid, const std::string& name,
                 const Vector& values);
FieldFile read_field(const std::filesystem::path& path);

/// Snapshot file name `<name>_<step>.vtk` with the step zero-padded to the
/// width of `last_step` (at least four digits).
std::string snapshot_name(const std::string& name, int step, int last_step);

/// Writes every `stride`-th column (and always the last) into `dir`.
/// Returns the files written.
std::vector<std::filesystem::path> write_trajectory(const std::filesystem::path& dir,
                                                    const Grid& grid, const std::string& name,
                                                    const History& columns, int stride = 1);

/// Reads `<prefix>_<step>.vtk` for steps 0..last_step.
History read_trajectory(const std::string& prefix, const Grid& grid, int last_step);

/// Comma-separated table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Scalar>> rows;
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

/// 64-bit FNV-1a of a byte string, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace lensopt
