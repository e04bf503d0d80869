#include "pathlearn/path.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pathlearn/common.hpp"

namespace pathlearn {

namespace {

std::vector<Eigen::Vector2d> resample_polyline(
    const std::vector<Eigen::Vector2d>& points, double spacing) {
  std::vector<double> cum{0.0};
  cum.reserve(points.size());
  for (std::size_t i = 1; i < points.size(); ++i)
    cum.push_back(cum.back() + (points[i] - points[i - 1]).norm());
  const double total = cum.back();
  if (total <= spacing) throw std::invalid_argument("path too short to resample");

  const int n = static_cast<int>(std::floor(total / spacing)) + 1;
  std::vector<Eigen::Vector2d> out;
  out.reserve(n);
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double s = std::min(k * spacing, total);
    while (seg + 2 < cum.size() && cum[seg + 1] < s) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
    out.push_back(points[seg] + t * (points[seg + 1] - points[seg]));
  }
  return out;
}

}  // namespace

Path Path::from_points(const std::vector<Eigen::Vector2d>& points,
                       double spacing, int laps) {
  if (points.size() < 2) throw std::invalid_argument("path needs >= 2 points");
  if (laps < 1) throw std::invalid_argument("laps must be >= 1");

  std::vector<Eigen::Vector2d> chain;
  chain.reserve(points.size() * laps);
  for (int lap = 0; lap < laps; ++lap) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      // Drop a duplicated seam point between laps.
      if (lap > 0 && i == 0 && (points.front() - chain.back()).norm() < 1e-9)
        continue;
      chain.push_back(points[i]);
    }
  }

  Path path;
  path.spacing_ = spacing;
  const auto samples = resample_polyline(chain, spacing);
  const int n = static_cast<int>(samples.size());
  path.vertices_.resize(n);
  for (int i = 0; i < n; ++i) {
    PathVertex& v = path.vertices_[i];
    v.id = i;
    v.position = samples[i];
    v.arc_length = i * spacing;
    const Eigen::Vector2d ahead = samples[std::min(i + 1, n - 1)];
    const Eigen::Vector2d behind = samples[std::max(i - 1, 0)];
    Eigen::Vector2d dir = ahead - behind;
    if (dir.norm() < 1e-12) dir = Eigen::Vector2d::UnitX();
    v.heading = std::atan2(dir.y(), dir.x());
    v.tangent = Eigen::Vector2d(std::cos(v.heading), std::sin(v.heading));
    v.normal = Eigen::Vector2d(-v.tangent.y(), v.tangent.x());
  }
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(i - 1, 0);
    const int hi = std::min(i + 1, n - 1);
    const double ds = (hi - lo) * spacing;
    path.vertices_[i].curvature =
        ds > 0.0 ? wrap_angle(path.vertices_[hi].heading -
                              path.vertices_[lo].heading) / ds
                 : 0.0;
  }
  return path;
}

Path Path::load(const std::string& filename, double spacing, int laps) {
  std::ifstream in(filename);
  if (!in) throw std::runtime_error("cannot open path file: " + filename);
  std::vector<Eigen::Vector2d> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.find_first_of("0123456789+-.") != 0) continue;  // column header
    std::istringstream row(line);
    double x, y;
    char comma;
    if (row >> x >> comma >> y) points.emplace_back(x, y);
  }
  if (points.size() < 2)
    throw std::runtime_error("path file has fewer than 2 points: " + filename);
  return from_points(points, spacing, laps);
}

double Path::length() const {
  return vertices_.empty() ? 0.0 : vertices_.back().arc_length;
}

const PathVertex& Path::vertex(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vertex id out of range");
  return vertices_[static_cast<std::size_t>(id)];
}

PathPoint Path::at(double s) const {
  if (vertices_.empty()) throw std::runtime_error("empty path");
  const double clamped = std::clamp(s, 0.0, length());
  const int lo = std::min(static_cast<int>(clamped / spacing_), size() - 2);
  const PathVertex& v0 = vertices_[std::max(lo, 0)];
  const PathVertex& v1 = vertices_[std::min(lo + 1, size() - 1)];
  const double t = spacing_ > 0.0 ? (clamped - v0.arc_length) / spacing_ : 0.0;

  PathPoint p;
  p.position = v0.position + t * (v1.position - v0.position);
  p.heading = wrap_angle(v0.heading + t * wrap_angle(v1.heading - v0.heading));
  p.tangent = Eigen::Vector2d(std::cos(p.heading), std::sin(p.heading));
  p.normal = Eigen::Vector2d(-p.tangent.y(), p.tangent.x());
  p.curvature = v0.curvature + t * (v1.curvature - v0.curvature);
  return p;
}

double Path::project(const Eigen::Vector2d& p, double s_hint, double back,
                     double forward) const {
  const double lo = std::clamp(s_hint - back, 0.0, length());
  const double hi = std::clamp(s_hint + forward, 0.0, length());
  const int i0 = static_cast<int>(lo / spacing_);
  const int i1 = std::min(static_cast<int>(std::ceil(hi / spacing_)), size() - 1);

  double best_s = lo;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = i0; i < i1; ++i) {
    const Eigen::Vector2d a = vertices_[i].position;
    const Eigen::Vector2d b = vertices_[i + 1].position;
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Eigen::Vector2d proj = a + t * ab;
    const double d2 = (p - proj).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = vertices_[i].arc_length + t * spacing_;
    }
  }
  return std::clamp(best_s, lo, hi);
}

int Path::nearest_vertex(const Eigen::Vector2d& p, double s_hint, double back,
                         double forward) const {
  const double s = project(p, s_hint, back, forward);
  return std::clamp(static_cast<int>(std::lround(s / spacing_)), 0, size() - 1);
}

}  // namespace pathlearn
