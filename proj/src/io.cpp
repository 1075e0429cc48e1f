#include "lensopt/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lensopt {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::string format(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string expect_word(std::istream& in, const std::string& word, const std::filesystem::path& path) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw IoError(path.string() + ": expected '" + word + "', found '" + got + "'");
  }
  return got;
}

}  // namespace

void write_field(const std::filesystem::path& path, const Grid& grid, const std::string& name,
                 const Vector& values) {
  if (values.size() != grid.node_count()) throw std::invalid_argument("field does not match grid");
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument("field name must be a single word");
  }
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << name << "\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << grid.nx() + 1 << ' ' << grid.ny() + 1 << " 1\n"
      << "ORIGIN 0 0 0\n"
      << "SPACING " << format(grid.hx()) << ' ' << format(grid.hy()) << " 1\n"
      << "POINT_DATA " << grid.node_count() << "\n"
      << "SCALARS " << name << " double 1\n"
      << "LOOKUP_TABLE default\n";
  for (int i = 0; i < values.size(); ++i) out << format(values[i]) << '\n';
  finish(out, path);
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw IoError(path.string() + ": not a legacy VTK file");
  std::getline(in, line);  // title
  FieldFile f;
  expect_word(in, "ASCII", path);
  expect_word(in, "DATASET", path);
  expect_word(in, "STRUCTURED_POINTS", path);
  int nz = 0;
  expect_word(in, "DIMENSIONS", path);
  in >> f.nx >> f.ny >> nz;
  f.nx -= 1;
  f.ny -= 1;
  Scalar ox, oy, oz, sz;
  expect_word(in, "ORIGIN", path);
  in >> ox >> oy >> oz;
  expect_word(in, "SPACING", path);
  in >> f.hx >> f.hy >> sz;
  int count = 0;
  expect_word(in, "POINT_DATA", path);
  in >> count;
  std::string type;
  int components = 0;
  expect_word(in, "SCALARS", path);
  in >> f.name >> type >> components;
  expect_word(in, "LOOKUP_TABLE", path);
  in >> line;
  if (!in || nz != 1 || components != 1 || count != (f.nx + 1) * (f.ny + 1)) {
    throw IoError(path.string() + ": unsupported or inconsistent header");
  }
  f.values.resize(count);
  // strtod rather than operator>> so subnormal values survive the round trip.
  std::string token;
  for (int i = 0; i < count; ++i) {
    if (!(in >> token)) throw IoError(path.string() + ": truncated data");
    char* end = nullptr;
    f.values[i] = std::strtod(token.c_str(), &end);
    if (*end != '\0') throw IoError(path.string() + ": bad value '" + token + "'");
  }
  return f;
}

std::string snapshot_name(const std::string& name, int step, int last_step) {
  const int width = std::max<int>(4, static_cast<int>(std::to_string(last_step).size()));
  std::string digits = std::to_string(step);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return name + "_" + digits + ".vtk";
}

std::vector<std::filesystem::path> write_trajectory(const std::filesystem::path& dir,
                                                    const Grid& grid, const std::string& name,
                                                    const History& columns, int stride) {
  if (stride < 1) throw std::invalid_argument("snapshot stride must be >= 1");
  std::vector<std::filesystem::path> written;
  const int last = static_cast<int>(columns.cols()) - 1;
  for (int n = 0; n <= last; ++n) {
    if (n % stride != 0 && n != last) continue;
    const auto path = dir / snapshot_name(name, n, last);
    write_field(path, grid, name, columns.col(n));
    written.push_back(path);
  }
  return written;
}

History read_trajectory(const std::string& prefix, const Grid& grid, int last_step) {
  const std::filesystem::path base(prefix);
  History out(grid.node_count(), last_step + 1);
  for (int n = 0; n <= last_step; ++n) {
    const auto path = base.parent_path() / snapshot_name(base.filename().string(), n, last_step);
    const FieldFile f = read_field(path);
    if (f.nx != grid.nx() || f.ny != grid.ny()) {
      throw IoError(path.string() + ": grid " + std::to_string(f.nx) + "x" + std::to_string(f.ny) +
                    " does not match " + std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
    }
    out.col(n) = f.values;
  }
  return out;
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::ofstream out = open_out(path);
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("table row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format(row[c]);
    out << '\n';
  }
  finish(out, path);
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty table");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<Scalar> row;
    std::stringstream rs(line);
    for (std::string cell; std::getline(rs, cell, ',');) {
      char* end = nullptr;
      const Scalar v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.header.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": row width mismatch");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lensopt
