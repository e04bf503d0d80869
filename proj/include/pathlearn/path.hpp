#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pathlearn {

/// One resampled path location. Tangent and normal are unit vectors; the
/// normal is the left-hand normal of the tangent, so contour error is
/// positive to the left of the path.
struct PathVertex {
  int id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;
  double arc_length = 0.0;
  Eigen::Vector2d tangent = Eigen::Vector2d::UnitX();
  Eigen::Vector2d normal = Eigen::Vector2d::UnitY();
  double curvature = 0.0;
};

/// Interpolated path query result.
struct PathPoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;
  Eigen::Vector2d tangent = Eigen::Vector2d::UnitX();
  Eigen::Vector2d normal = Eigen::Vector2d::UnitY();
  double curvature = 0.0;
};

/// Piecewise-linear path resampled to uniform arc-length spacing.
class Path {
 public:
  Path() = default;

  /// Resamples a polyline to uniform spacing (default 0.25 m) and derives
  /// headings, tangents, left normals, and curvature per vertex.
  static Path from_points(const std::vector<Eigen::Vector2d>& points,
                          double spacing = 0.25, int laps = 1);

  /// Loads "# pathlearn-path v1" files: a comment header, an "x,y" column
  /// line, then one point per row.
  static Path load(const std::string& filename, double spacing = 0.25,
                   int laps = 1);

  const std::vector<PathVertex>& vertices() const { return vertices_; }
  int size() const { return static_cast<int>(vertices_.size()); }
  double spacing() const { return spacing_; }
  double length() const;

  const PathVertex& vertex(int id) const;

  /// Interpolated frame at arc length s (clamped to [0, length]).
  PathPoint at(double s) const;

  /// Arc length of the orthogonal projection of `p`, searched within
  /// [s_hint - back, s_hint + forward] and clamped to the path.
  double project(const Eigen::Vector2d& p, double s_hint, double back = 2.0,
                 double forward = 10.0) const;

  /// Vertex whose arc length is nearest to the projection of `p`.
  int nearest_vertex(const Eigen::Vector2d& p, double s_hint, double back = 2.0,
                     double forward = 10.0) const;

 private:
  std::vector<PathVertex> vertices_;
  double spacing_ = 0.25;
};

}  // namespace pathlearn
