#include "fractal_lab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fractal_lab/errors.hpp"

namespace fractal_lab {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string points_csv(const PointSet& points, const std::vector<double>* times) {
  if (times && times->size() != points.size()) throw InvalidArgument("points_csv: times do not match the points");
  std::string out;
  for (std::size_t c = 0; c < points.dim(); ++c) out += (c ? ",x" : "x") + std::to_string(c);
  if (times) out += ",t";
  out += '\n';
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto p = points[k];
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (c) out += ',';
      out += format_double(p[c]);
    }
    if (times) out += ',' + format_double((*times)[k]);
    out += '\n';
  }
  return out;
}

std::string curve_csv(const PolyCurve& curve) { return points_csv(curve.points(), &curve.times()); }

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r' && ch != ' ') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

ParsedPoints parse_points_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("parse_points_csv: empty input");
  const auto header = split(line);
  std::ptrdiff_t tcol = -1;
  std::size_t dim = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "t")
      tcol = static_cast<std::ptrdiff_t>(c);
    else if (header[c] == "x" + std::to_string(dim))
      ++dim;
    else
      throw InvalidArgument("parse_points_csv: unexpected column '" + header[c] + "'");
  }
  if (dim == 0) throw InvalidArgument("parse_points_csv: no coordinate columns");
  std::vector<double> coords, times;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw InvalidArgument("parse_points_csv: row " + std::to_string(row) + " has the wrong number of fields");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto res = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (res.ec != std::errc() || res.ptr != cells[c].data() + cells[c].size())
        throw InvalidArgument("parse_points_csv: bad number '" + cells[c] + "' in row " + std::to_string(row));
      (static_cast<std::ptrdiff_t>(c) == tcol ? times : coords).push_back(v);
    }
  }
  return {PointSet(dim, std::move(coords)), std::move(times)};
}

std::string polylines_csv(std::span<const std::vector<double>> polylines) {
  std::string out = "loop_id,vertex_index,x,y\n";
  for (std::size_t id = 0; id < polylines.size(); ++id)
    for (std::size_t k = 0; k < polylines[id].size() / 2; ++k)
      out += std::to_string(id) + ',' + std::to_string(k) + ',' + format_double(polylines[id][2 * k]) + ',' +
             format_double(polylines[id][2 * k + 1]) + '\n';
  return out;
}

std::string driver_csv(const Driver& driver) {
  std::string out = "t,W,V\n";
  for (std::size_t k = 0; k < driver.W.size(); ++k) {
    out += format_double(driver.time(k)) + ',' + format_double(driver.W[k]) + ',';
    if (k < driver.V.size()) out += format_double(driver.V[k]);
    out += '\n';
  }
  return out;
}

std::string events_csv(std::span<const DyadicEventHit> hits) {
  std::string out = "level,index,increment_norm,max_excursion\n";
  for (const auto& h : hits)
    out += std::to_string(h.level) + ',' + std::to_string(h.index) + ',' + format_double(h.increment_norm) + ',' +
           format_double(h.max_excursion) + '\n';
  return out;
}

std::string pgm_bytes(const GrayImage& image, PgmFormat format) {
  if (image.pixels.size() != image.width * image.height) throw InvalidArgument("pgm_bytes: pixel count mismatch");
  std::string out = (format == PgmFormat::Binary ? "P5\n" : "P2\n") + std::to_string(image.width) + ' ' +
                    std::to_string(image.height) + "\n255\n";
  if (format == PgmFormat::Binary) {
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
  }
  for (std::size_t j = 0; j < image.height; ++j) {
    for (std::size_t i = 0; i < image.width; ++i) {
      if (i) out += ' ';
      out += std::to_string(image.pixels[j * image.width + i]);
    }
    out += '\n';
  }
  return out;
}

Json to_json(const TurningReport& r) {
  Json j;
  j["constant"] = r.constant;
  j["i"] = r.i;
  j["j"] = r.j;
  j["scale"] = r.scale;
  j["stride"] = r.stride;
  j["infinite_count"] = r.infinite_count;
  Json w = Json::array();
  for (const auto& [a, b] : r.infinite_witnesses) w.push_back({a, b});
  j["infinite_witnesses"] = w;
  return j;
}

Json to_json(const ScalingFit& f) {
  Json j;
  j["scales"] = f.scales;
  j["counts"] = f.counts;
  j["used"] = f.used;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["r_squared"] = f.r_squared;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fractal_lab
