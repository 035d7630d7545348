#pragma once

#include <Eigen/Core>

#include <string>

#include "uslice/barycenter.hpp"
#include "uslice/measures.hpp"
#include "uslice/types.hpp"

namespace uslice {

// Point-cloud CSV: UTF-8, header "x1,...,xd,w", one atom per row, '.' as
// the decimal separator regardless of locale. Written values round-trip
// exactly.
DiscreteMeasure<double> read_point_cloud_csv(const std::string& path);
void write_point_cloud_csv(const std::string& path, const DiscreteMeasure<double>& m);

// Dense raster holding row-major cell values.
struct GridRaster {
  Index rows = 0;
  Index cols = 0;
  Eigen::VectorXd values;  // rows * cols entries, row-major
};

// Binary raster file: "USOTGRID v1\n<rows> <cols>\n" followed by row-major
// 64-bit little-endian floats.
GridRaster read_grid_raster(const std::string& path);
void write_grid_raster(const std::string& path, const GridRaster& raster);

// Cell-center support for a raster on the unit square: cell (r, c) sits at
// ((c + 0.5) / cols, (r + 0.5) / rows).
Eigen::MatrixXd raster_grid_points(Index rows, Index cols);

// Raster cells as a (generally unnormalized) positive measure.
DiscreteMeasure<double> measure_from_raster(const GridRaster& raster);

}  // namespace uslice
