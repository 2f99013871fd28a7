#pragma once

// Text and raster serialization: point/curve CSV, multi-polyline CSV, driver
// and event CSV, PGM images, JSON records for reports.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fractal_lab/brownian.hpp"
#include "fractal_lab/geom.hpp"
#include "fractal_lab/loewner.hpp"
#include "fractal_lab/raster.hpp"

namespace fractal_lab {

using Json = nlohmann::ordered_json;

/// Doubles are printed with 17 significant digits so CSV round-trips exactly.
std::string format_double(double v);

/// Columns x0..x{d-1}, plus t when `times` is given.
std::string points_csv(const PointSet& points, const std::vector<double>* times = nullptr);
std::string curve_csv(const PolyCurve& curve);

/// Inverse of points_csv: header row required; a column named t becomes the times.
struct ParsedPoints {
  PointSet points;
  std::vector<double> times;
};
ParsedPoints parse_points_csv(const std::string& text);

/// Rows loop_id,vertex_index,x,y for x/y-interleaved polylines.
std::string polylines_csv(std::span<const std::vector<double>> polylines);

/// Rows t,W,V (V empty for drivers without a force point).
std::string driver_csv(const Driver& driver);

/// Rows level,index,increment_norm,max_excursion.
std::string events_csv(std::span<const DyadicEventHit> hits);

enum class PgmFormat { Ascii, Binary };  // P2 / P5
std::string pgm_bytes(const GrayImage& image, PgmFormat format);

Json to_json(const TurningReport& report);
Json to_json(const ScalingFit& fit);

/// Writes the whole string; IoError on failure.
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace fractal_lab
