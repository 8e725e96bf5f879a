#pragma once

// Slit-aware triangulations. Comb domains are meshed by a balanced dyadic
// quadtree aligned with every tooth height, each leaf split into a fan around
// its centre. Points on a two-sided slit get one vertex per sheet; tips are
// shared by both sheets.

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comblab/geometry.hpp"

namespace comblab {

class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnresolvedGapError : public MeshError {
public:
  UnresolvedGapError(const std::string& msg, int band) : MeshError(msg), band_(band) {}
  int band() const { return band_; }

private:
  int band_;
};

/// Extra local refinement: cells within reach of `at` are at most `size`.
struct RefinePoint {
  Point at;
  double size = 0.0;
};

struct MeshOptions {
  /// Cell size along slits and the cut.
  double h_target = 1.0 / 16;
  /// Geometric ratio of neighbouring cell sizes toward tips; in (0, 1].
  double grading = 0.7;
  /// Tips are refined to h_target * grading^tip_levels.
  int tip_levels = 3;
  /// Cells away from all features grow to at most coarsening * h_target.
  double coarsening = 4.0;
  double min_angle_deg = 20.0;
  std::vector<RefinePoint> refine;
};

struct BoundaryNode {
  int vertex = 0;
  BoundaryClass cls = BoundaryClass::OuterRegular;
  ExtendedPoint ext;
};

using Triangle = std::array<int, 3>;

struct SlitMesh {
  std::vector<Point> points;
  std::vector<Sheet> sheets;
  std::vector<Triangle> triangles;
  std::vector<BoundaryNode> boundary;
  std::vector<SlitInfo> slits;
  /// Number of holes of the meshed region (Euler characteristic is 1 - holes).
  int holes = 0;
  double h_target = 0.0;
  double min_angle_deg = 20.0;
  std::string label;

  std::size_t num_vertices() const { return points.size(); }
  ExtendedPoint extended(int v) const {
    return ExtendedPoint{points[static_cast<std::size_t>(v)], sheets[static_cast<std::size_t>(v)]};
  }
  /// Vertex index at exactly this position and sheet, if present.
  std::optional<int> find_vertex(const Point& p, const Sheet& sheet) const;
  /// All vertices at exactly this position.
  std::vector<int> vertices_at(const Point& p) const;
};

struct MeshDiagnostics {
  double min_angle_deg = 0.0;
  double max_aspect = 0.0;
  int flipped_or_degenerate = 0;
  bool orientation_ok = false;
  bool angle_ok = false;
  bool slit_pairing_ok = false;
  bool conforming_ok = false;
  bool boundary_ok = false;
  long euler = 0;
  bool euler_ok = false;
  int component_count = 0;
  int duplicated_nodes = 0;  // vertices sharing coordinates with another vertex
  int tip_nodes = 0;
  std::map<BoundaryClass, int> class_counts;
  std::vector<std::string> problems;

  bool ok() const {
    return orientation_ok && angle_ok && slit_pairing_ok && conforming_ok && boundary_ok &&
           euler_ok && component_count == 1;
  }
};

SlitMesh generate_mesh(const DomainSpec& domain, const MeshOptions& options);

/// Structured rectangle [x0,x1]x[y0,y1] with nx*ny cells split on a diagonal.
SlitMesh generate_rectangle_mesh(Point lo, Point hi, int nx, int ny);

/// Polygonal ring r_in <= |x| <= r_out, vertices on the two circles.
SlitMesh generate_ring_mesh(double r_in, double r_out, double h);

MeshDiagnostics validate_mesh(const SlitMesh& mesh);

/// Boundary nodes sorted by (class, coordinates, sheet), one entry per sheet.
std::vector<BoundaryNode> boundary_nodes(const SlitMesh& mesh);

/// Locates points in triangles; the mesh must outlive the locator.
class PointLocator {
public:
  explicit PointLocator(const SlitMesh& mesh);

  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{};
  };
  std::optional<Hit> locate(const Point& p) const;
  /// P1 interpolation of nodal values; throws MeshError outside the mesh.
  double interpolate(std::span<const double> values, const Point& p) const;

private:
  const SlitMesh* mesh_;
  Point lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

struct ScalarField {
  std::string name;
  std::vector<double> values;
};

/// Legacy ASCII VTK unstructured grid with triangle cells (type 5).
void write_vtk(std::ostream& os, const SlitMesh& mesh, const std::vector<ScalarField>& fields,
               const std::string& title = "comblab mesh");

double triangle_area(const Point& a, const Point& b, const Point& c);

}  // namespace comblab
