#include "uslice/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace uslice {

namespace {

double parse_double(const std::string& token, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' ||
                           *(last - 1) == '\r'))
    --last;
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) {
    std::ostringstream msg;
    msg << path << ":" << line << ": cannot parse number '" << token << "'";
    throw std::invalid_argument(msg.str());
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

void format_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

DiscreteMeasure<double> read_point_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open point-cloud file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path + ": empty point-cloud file");
  const auto header = split_csv(strip_cr(line));
  if (header.size() < 2 || header.back() != "w")
    throw std::invalid_argument(path + ": header must be x1,...,xd,w");
  const std::size_t d = header.size() - 1;

  std::vector<double> coords;
  std::vector<double> weights;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string clean = strip_cr(line);
    if (clean.empty()) continue;
    const auto fields = split_csv(clean);
    if (fields.size() != d + 1) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << d + 1 << " fields, got "
          << fields.size();
      throw std::invalid_argument(msg.str());
    }
    for (std::size_t c = 0; c < d; ++c)
      coords.push_back(parse_double(fields[c], path, line_no));
    weights.push_back(parse_double(fields[d], path, line_no));
  }
  const Index n = static_cast<Index>(weights.size());
  if (n == 0) throw std::invalid_argument(path + ": no atoms");
  Eigen::MatrixXd points(n, static_cast<Index>(d));
  Eigen::VectorXd w(n);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < static_cast<Index>(d); ++c)
      points(i, c) = coords[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(c)];
    w(i) = weights[static_cast<std::size_t>(i)];
  }
  return DiscreteMeasure<double>(std::move(points), std::move(w));
}

void write_point_cloud_csv(const std::string& path, const DiscreteMeasure<double>& m) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw std::invalid_argument("cannot write point-cloud file: " + path);
  std::string buffer;
  for (Index c = 0; c < m.dim(); ++c) {
    buffer += "x";
    buffer += std::to_string(c + 1);
    buffer += ",";
  }
  buffer += "w\n";
  for (Index i = 0; i < m.size(); ++i) {
    for (Index c = 0; c < m.dim(); ++c) {
      format_double(buffer, m.points()(i, c));
      buffer += ",";
    }
    format_double(buffer, m.weights()(i));
    buffer += "\n";
  }
  out << buffer;
  if (!out) throw std::runtime_error("write failed: " + path);
}

GridRaster read_grid_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open raster file: " + path);
  std::string magic;
  if (!std::getline(in, magic) || strip_cr(magic) != "USOTGRID v1")
    throw std::invalid_argument(path + ": not a USOTGRID v1 raster");
  std::string dims;
  if (!std::getline(in, dims))
    throw std::invalid_argument(path + ": missing raster dimensions");
  std::istringstream dim_stream(strip_cr(dims));
  long long rows = 0, cols = 0;
  if (!(dim_stream >> rows >> cols) || rows <= 0 || cols <= 0)
    throw std::invalid_argument(path + ": bad raster dimensions");
  GridRaster raster;
  raster.rows = static_cast<Index>(rows);
  raster.cols = static_cast<Index>(cols);
  raster.values.resize(raster.rows * raster.cols);
  static_assert(sizeof(double) == 8 && std::endian::native == std::endian::little,
                "raster payload is little-endian 8-byte doubles");
  in.read(reinterpret_cast<char*>(raster.values.data()),
          static_cast<std::streamsize>(raster.values.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(raster.values.size() * sizeof(double)))
    throw std::invalid_argument(path + ": truncated raster payload");
  return raster;
}

void write_grid_raster(const std::string& path, const GridRaster& raster) {
  if (raster.rows <= 0 || raster.cols <= 0 ||
      raster.values.size() != raster.rows * raster.cols)
    throw std::invalid_argument("write_grid_raster: inconsistent raster");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write raster file: " + path);
  out << "USOTGRID v1\n" << raster.rows << " " << raster.cols << "\n";
  out.write(reinterpret_cast<const char*>(raster.values.data()),
            static_cast<std::streamsize>(raster.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd raster_grid_points(Index rows, Index cols) {
  Eigen::MatrixXd points(rows * cols, 2);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const Index cell = r * cols + c;
      points(cell, 0) = (static_cast<double>(c) + 0.5) / static_cast<double>(cols);
      points(cell, 1) = (static_cast<double>(r) + 0.5) / static_cast<double>(rows);
    }
  return points;
}

DiscreteMeasure<double> measure_from_raster(const GridRaster& raster) {
  return DiscreteMeasure<double>(raster_grid_points(raster.rows, raster.cols),
                                 raster.values);
}

}  // namespace uslice
