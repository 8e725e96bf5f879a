#include "comblab/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace comblab {

double triangle_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::optional<int> SlitMesh::find_vertex(const Point& p, const Sheet& sheet) const {
  for (std::size_t v = 0; v < points.size(); ++v)
    if (points[v] == p && sheets[v] == sheet) return static_cast<int>(v);
  return std::nullopt;
}

std::vector<int> SlitMesh::vertices_at(const Point& p) const {
  std::vector<int> out;
  for (std::size_t v = 0; v < points.size(); ++v)
    if (points[v] == p) out.push_back(static_cast<int>(v));
  return out;
}

namespace {

constexpr int kMaxLevel = 28;

struct CellKey {
  int level = 0;
  std::int64_t i = 0;
  std::int64_t j = 0;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

double side_of(int level) { return std::ldexp(2.0, -level); }

struct Box {
  double x0, y0, x1, y1;
};

double dist_box_point(const Box& b, const Point& p) {
  const double dx = std::max({0.0, b.x0 - p.x, p.x - b.x1});
  const double dy = std::max({0.0, b.y0 - p.y, p.y - b.y1});
  return std::hypot(dx, dy);
}

double dist_box_hsegment(const Box& b, double xa, double xb, double y) {
  const double dx = std::max({0.0, xa - b.x1, b.x0 - xb});
  const double dy = std::max({0.0, b.y0 - y, y - b.y1});
  return std::hypot(dx, dy);
}

double dist_box_vsegment(const Box& b, double x, double ya, double yb) {
  const double dx = std::max({0.0, b.x0 - x, x - b.x1});
  const double dy = std::max({0.0, ya - b.y1, b.y0 - yb});
  return std::hypot(dx, dy);
}

using VertexKey = std::tuple<std::int64_t, std::int64_t, int, int>;

class QuadtreeMesher {
public:
  QuadtreeMesher(const DomainSpec& domain, const MeshOptions& options)
      : domain_(domain), opt_(options), slits_(slits_of(domain)) {
    if (const auto* t = std::get_if<TruncatedCombSpec>(&domain)) cut_ = t->cut_length();
    growth_ = 1.0 / opt_.grading - 1.0;
    h_max_ = opt_.coarsening * opt_.h_target;
  }

  SlitMesh run() {
    build(CellKey{0, 0, 0});
    balance();
    return assemble();
  }

private:
  enum class Status { Removed, Split, Leaf };

  Box box(const CellKey& c) const {
    const double s = side_of(c.level);
    const double x0 = -1.0 + static_cast<double>(c.i) * s;
    const double y0 = static_cast<double>(c.j) * s;
    return {x0, y0, x0 + s, y0 + s};
  }

  double local_size(const Box& b) const {
    double h = h_max_;
    const auto relax = [&](double size, double d) { h = std::min(h, size + growth_ * d); };
    const double tip_size = opt_.h_target * std::pow(opt_.grading, opt_.tip_levels);
    for (const auto& s : slits_) {
      const double y = tooth_height(s.tooth);
      relax(opt_.h_target, dist_box_hsegment(b, 0.0, 1.0, y));
      relax(tip_size, dist_box_point(b, {0.0, y}));
    }
    if (cut_ > 0.0) relax(opt_.h_target * opt_.grading, dist_box_vsegment(b, 0.0, 0.0, cut_));
    for (const auto& r : opt_.refine) relax(r.size, dist_box_point(b, r.at));
    return h;
  }

  Status classify(const CellKey& c) const {
    if (c.level == 0) return Status::Split;
    const Box b = box(c);
    if (b.x0 >= 0.0) {
      if (cut_ > 0.0 && b.y1 <= cut_) return Status::Removed;
      for (const auto& s : slits_) {
        const double y = tooth_height(s.tooth);
        if (b.y0 < y && y < b.y1) return Status::Split;
      }
    }
    if (b.x1 - b.x0 > local_size(b)) return Status::Split;
    return Status::Leaf;
  }

  void build(const CellKey& c) {
    switch (classify(c)) {
      case Status::Removed: return;
      case Status::Leaf: leaves_.insert(c); return;
      case Status::Split:
        if (c.level + 2 >= kMaxLevel) throw MeshError("quadtree refinement exceeded the level limit");
        for (int dj = 0; dj < 2; ++dj)
          for (int di = 0; di < 2; ++di) build(CellKey{c.level + 1, 2 * c.i + di, 2 * c.j + dj});
    }
  }

  std::optional<int> covering_level(int level, std::int64_t i, std::int64_t j) const {
    const std::int64_t n = std::int64_t{1} << level;
    if (i < 0 || j < 0 || i >= n || j >= n) return std::nullopt;
    for (int l = level; l >= 0; --l) {
      const int shift = level - l;
      if (leaves_.count(CellKey{l, i >> shift, j >> shift})) return l;
    }
    return std::nullopt;
  }

  void balance() {
    static constexpr int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (;;) {
      std::set<CellKey> to_split;
      for (const auto& c : leaves_)
        for (const auto& d : dirs) {
          const auto l = covering_level(c.level, c.i + d[0], c.j + d[1]);
          if (l && *l < c.level - 1) {
            const int shift = c.level - *l;
            to_split.insert(CellKey{*l, (c.i + d[0]) >> shift, (c.j + d[1]) >> shift});
          }
        }
      if (to_split.empty()) return;
      for (const auto& c : to_split) {
        if (!leaves_.erase(c)) continue;
        for (int dj = 0; dj < 2; ++dj)
          for (int di = 0; di < 2; ++di) leaves_.insert(CellKey{c.level + 1, 2 * c.i + di, 2 * c.j + dj});
      }
    }
  }

  bool neighbour_finer(const CellKey& c, int di, int dj) const {
    const std::int64_t ni = c.i + di;
    const std::int64_t nj = c.j + dj;
    const int l = c.level + 1;
    CellKey a{l, 0, 0}, b{l, 0, 0};
    if (di == 1) { a = {l, 2 * ni, 2 * nj}; b = {l, 2 * ni, 2 * nj + 1}; }
    if (di == -1) { a = {l, 2 * ni + 1, 2 * nj}; b = {l, 2 * ni + 1, 2 * nj + 1}; }
    if (dj == 1) { a = {l, 2 * ni, 2 * nj}; b = {l, 2 * ni + 1, 2 * nj}; }
    if (dj == -1) { a = {l, 2 * ni, 2 * nj + 1}; b = {l, 2 * ni + 1, 2 * nj + 1}; }
    return leaves_.count(a) || leaves_.count(b);
  }

  static Point to_point(std::int64_t ix, std::int64_t iy) {
    const double unit = std::ldexp(2.0, -kMaxLevel);
    return {-1.0 + static_cast<double>(ix) * unit, static_cast<double>(iy) * unit};
  }

  Sheet sheet_for(const Point& p, const Box& cell) const {
    const int j = dyadic_level(p.y);
    const bool present = j >= 0 && std::any_of(slits_.begin(), slits_.end(),
                                               [&](const SlitInfo& s) { return s.tooth == j; });
    if (present && p.x == 0.0) return Sheet::tip(j);
    if (present && p.x > 0.0) return p.y == cell.y0 ? Sheet::upper(j) : Sheet::lower(j);
    if (cut_ > 0.0 && p.x == 0.0 && p.y > 0.0 && p.y < cut_) return Sheet::cut();
    if (cut_ == 0.0 && p.y == 0.0 && p.x > 0.0) return Sheet::inaccessible();
    return Sheet::free();
  }

  int vertex(std::int64_t ix, std::int64_t iy, const Box& cell, SlitMesh& mesh) {
    const Point p = to_point(ix, iy);
    const Sheet s = sheet_for(p, cell);
    const VertexKey key{ix, iy, static_cast<int>(s.kind), s.tooth};
    const auto [it, inserted] = vertex_ids_.try_emplace(key, static_cast<int>(mesh.points.size()));
    if (inserted) {
      mesh.points.push_back(p);
      mesh.sheets.push_back(s);
    }
    return it->second;
  }

  SlitMesh assemble() {
    SlitMesh mesh;
    mesh.slits = slits_;
    mesh.h_target = opt_.h_target;
    mesh.min_angle_deg = opt_.min_angle_deg;
    mesh.label = describe(domain_);
    for (const auto& c : leaves_) {
      const Box b = box(c);
      const std::int64_t s = std::int64_t{1} << (kMaxLevel - c.level);
      const std::int64_t x0 = c.i * s, y0 = c.j * s, h = s / 2;
      std::vector<int> cycle;
      cycle.push_back(vertex(x0, y0, b, mesh));
      if (neighbour_finer(c, 0, -1)) cycle.push_back(vertex(x0 + h, y0, b, mesh));
      cycle.push_back(vertex(x0 + s, y0, b, mesh));
      if (neighbour_finer(c, 1, 0)) cycle.push_back(vertex(x0 + s, y0 + h, b, mesh));
      cycle.push_back(vertex(x0 + s, y0 + s, b, mesh));
      if (neighbour_finer(c, 0, 1)) cycle.push_back(vertex(x0 + h, y0 + s, b, mesh));
      cycle.push_back(vertex(x0, y0 + s, b, mesh));
      if (neighbour_finer(c, -1, 0)) cycle.push_back(vertex(x0, y0 + h, b, mesh));
      const int centre = vertex(x0 + h, y0 + h, b, mesh);
      for (std::size_t k = 0; k < cycle.size(); ++k)
        mesh.triangles.push_back({centre, cycle[k], cycle[(k + 1) % cycle.size()]});
    }
    mesh.boundary = boundary_nodes(mesh);
    return mesh;
  }

  DomainSpec domain_;
  MeshOptions opt_;
  std::vector<SlitInfo> slits_;
  double cut_ = 0.0;
  double growth_ = 0.0;
  double h_max_ = 0.0;
  std::set<CellKey> leaves_;
  std::map<VertexKey, int> vertex_ids_;
};

using Edge = std::pair<int, int>;
Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::map<Edge, int> edge_counts(const SlitMesh& mesh) {
  std::map<Edge, int> counts;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++counts[make_edge(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)])];
  return counts;
}

BoundaryClass class_of(const SlitMesh& mesh, int v) {
  const Sheet& s = mesh.sheets[static_cast<std::size_t>(v)];
  if (s.kind == SheetKind::Cut) return BoundaryClass::Cut;
  if (mesh.slits.empty() && mesh.label != "rectangle") return BoundaryClass::OuterRegular;
  const Point& p = mesh.points[static_cast<std::size_t>(v)];
  if (p.x < -1.0 || p.x > 1.0 || p.y < 0.0 || p.y > 2.0) return BoundaryClass::OuterRegular;
  return classify_boundary(CombSpec{1}, mesh.extended(v));
}

}  // namespace

SlitMesh generate_mesh(const DomainSpec& domain, const MeshOptions& options) {
  if (!(options.h_target > 0.0)) throw MeshError("h_target must be positive");
  if (!(options.grading > 0.0) || options.grading > 1.0) throw MeshError("grading ratio must lie in (0, 1]");
  if (options.coarsening < 1.0) throw MeshError("coarsening must be >= 1");
  const double gap = smallest_gap(domain);
  if (options.h_target > gap) {
    const auto slits = slits_of(domain);
    const int band = slits.empty() ? 0 : slits.back().tooth;
    std::ostringstream os;
    os << "unresolved gap: band " << band << " has height " << gap << " < h_target "
       << options.h_target << " in " << describe(domain);
    throw UnresolvedGapError(os.str(), band);
  }
  for (const auto& r : options.refine)
    if (!(r.size > 0.0)) throw MeshError("refinement size must be positive");
  return QuadtreeMesher(domain, options).run();
}

SlitMesh generate_rectangle_mesh(Point lo, Point hi, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(hi.x > lo.x) || !(hi.y > lo.y)) throw MeshError("bad rectangle mesh request");
  SlitMesh mesh;
  mesh.label = "box";
  mesh.h_target = std::max((hi.x - lo.x) / nx, (hi.y - lo.y) / ny);
  const auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? hi.x : lo.x + (hi.x - lo.x) * i / nx;
      const double y = j == ny ? hi.y : lo.y + (hi.y - lo.y) * j / ny;
      mesh.points.push_back({x, y});
      mesh.sheets.push_back(Sheet::free());
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  mesh.boundary = boundary_nodes(mesh);
  return mesh;
}

SlitMesh generate_ring_mesh(double r_in, double r_out, double h) {
  if (!(r_in > 0.0) || !(r_out > r_in) || !(h > 0.0)) throw MeshError("bad ring mesh request");
  SlitMesh mesh;
  mesh.label = "ring";
  mesh.holes = 1;
  mesh.h_target = h;
  const int nr = std::max(1, static_cast<int>(std::ceil((r_out - r_in) / h)));
  const int nt = std::max(8, static_cast<int>(std::ceil(std::numbers::pi * (r_in + r_out) / h)));
  for (int i = 0; i <= nr; ++i) {
    const double r = i == nr ? r_out : r_in + (r_out - r_in) * i / nr;
    for (int k = 0; k < nt; ++k) {
      const double t = 2.0 * std::numbers::pi * k / nt;
      mesh.points.push_back({r * std::cos(t), r * std::sin(t)});
      mesh.sheets.push_back(Sheet::free());
    }
  }
  const auto id = [&](int i, int k) { return i * nt + (k % nt); };
  for (int i = 0; i < nr; ++i)
    for (int k = 0; k < nt; ++k) {
      const int a = id(i, k), b = id(i, k + 1), c = id(i + 1, k + 1), d = id(i + 1, k);
      if ((i + k) % 2 == 0) {
        mesh.triangles.push_back({a, c, b});
        mesh.triangles.push_back({a, d, c});
      } else {
        mesh.triangles.push_back({a, d, b});
        mesh.triangles.push_back({b, d, c});
      }
    }
  mesh.boundary = boundary_nodes(mesh);
  return mesh;
}

std::vector<BoundaryNode> boundary_nodes(const SlitMesh& mesh) {
  std::set<int> on_boundary;
  for (const auto& [e, n] : edge_counts(mesh))
    if (n == 1) {
      on_boundary.insert(e.first);
      on_boundary.insert(e.second);
    }
  std::vector<BoundaryNode> out;
  out.reserve(on_boundary.size());
  for (const int v : on_boundary) out.push_back({v, class_of(mesh, v), mesh.extended(v)});
  std::sort(out.begin(), out.end(), [](const BoundaryNode& a, const BoundaryNode& b) {
    return std::tie(a.cls, a.ext.xy, a.ext.sheet) < std::tie(b.cls, b.ext.xy, b.ext.sheet);
  });
  return out;
}

// ---------------------------------------------------------------------------

PointLocator::PointLocator(const SlitMesh& mesh) : mesh_(&mesh) {
  if (mesh.points.empty()) throw MeshError("empty mesh");
  lo_ = hi_ = mesh.points.front();
  for (const auto& p : mesh.points) {
    lo_.x = std::min(lo_.x, p.x); lo_.y = std::min(lo_.y, p.y);
    hi_.x = std::max(hi_.x, p.x); hi_.y = std::max(hi_.y, p.y);
  }
  const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.triangles.size()) / 2.0)));
  nx_ = ny_ = n;
  buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  const double wx = (hi_.x - lo_.x) / nx_, wy = (hi_.y - lo_.y) / ny_;
  const auto cell = [](double v, double lo, double w, int n) {
    return std::clamp(static_cast<int>(std::floor((v - lo) / w)), 0, n - 1);
  };
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    double x0 = hi_.x, x1 = lo_.x, y0 = hi_.y, y1 = lo_.y;
    for (const int v : mesh.triangles[t]) {
      const Point& p = mesh.points[static_cast<std::size_t>(v)];
      x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    for (int j = cell(y0, lo_.y, wy, ny_); j <= cell(y1, lo_.y, wy, ny_); ++j)
      for (int i = cell(x0, lo_.x, wx, nx_); i <= cell(x1, lo_.x, wx, nx_); ++i)
        buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(const Point& p) const {
  if (p.x < lo_.x || p.x > hi_.x || p.y < lo_.y || p.y > hi_.y) return std::nullopt;
  const double wx = (hi_.x - lo_.x) / nx_, wy = (hi_.y - lo_.y) / ny_;
  const int i = std::clamp(static_cast<int>(std::floor((p.x - lo_.x) / wx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y - lo_.y) / wy)), 0, ny_ - 1);
  for (const int t : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
    const auto& tri = mesh_->triangles[static_cast<std::size_t>(t)];
    const Point& a = mesh_->points[static_cast<std::size_t>(tri[0])];
    const Point& b = mesh_->points[static_cast<std::size_t>(tri[1])];
    const Point& c = mesh_->points[static_cast<std::size_t>(tri[2])];
    const double area = triangle_area(a, b, c);
    const double l0 = triangle_area(p, b, c) / area;
    const double l1 = triangle_area(a, p, c) / area;
    const double l2 = 1.0 - l0 - l1;
    constexpr double tol = -1e-12;
    if (l0 >= tol && l1 >= tol && l2 >= tol) return Hit{t, {l0, l1, l2}};
  }
  return std::nullopt;
}

double PointLocator::interpolate(std::span<const double> values, const Point& p) const {
  const auto hit = locate(p);
  if (!hit) {
    std::ostringstream os;
    os << "point (" << p.x << ", " << p.y << ") is outside the mesh";
    throw MeshError(os.str());
  }
  const auto& tri = mesh_->triangles[static_cast<std::size_t>(hit->triangle)];
  double u = 0.0;
  for (int k = 0; k < 3; ++k)
    u += hit->bary[static_cast<std::size_t>(k)] * values[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
  return u;
}

// ---------------------------------------------------------------------------

MeshDiagnostics validate_mesh(const SlitMesh& mesh) {
  MeshDiagnostics d;
  const auto problem = [&](std::string s) {
    if (std::find(d.problems.begin(), d.problems.end(), s) == d.problems.end())
      d.problems.push_back(std::move(s));
  };
  const auto& P = mesh.points;
  const auto pt = [&](int v) -> const Point& { return P[static_cast<std::size_t>(v)]; };

  // Orientation, angles, aspect.
  d.min_angle_deg = 180.0;
  for (const auto& t : mesh.triangles) {
    for (const int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= P.size()) {
        problem("triangle references a missing vertex");
        return d;
      }
    const double area = triangle_area(pt(t[0]), pt(t[1]), pt(t[2]));
    if (!(area > 0.0)) {
      ++d.flipped_or_degenerate;
      continue;
    }
    double longest = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Point& a = pt(t[static_cast<std::size_t>(k)]);
      const Point& b = pt(t[static_cast<std::size_t>((k + 1) % 3)]);
      const Point& c = pt(t[static_cast<std::size_t>((k + 2) % 3)]);
      const double ux = b.x - a.x, uy = b.y - a.y, vx = c.x - a.x, vy = c.y - a.y;
      const double ang = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
      d.min_angle_deg = std::min(d.min_angle_deg, ang * 180.0 / std::numbers::pi);
      longest = std::max(longest, distance(a, b));
    }
    d.max_aspect = std::max(d.max_aspect, longest * longest / (2.0 * area));
  }
  d.orientation_ok = d.flipped_or_degenerate == 0;
  if (!d.orientation_ok) problem(std::to_string(d.flipped_or_degenerate) + " flipped or degenerate triangles");
  d.angle_ok = d.min_angle_deg >= mesh.min_angle_deg;
  if (!d.angle_ok) problem("minimum angle below floor");

  // Topology.
  const auto counts = edge_counts(mesh);
  std::vector<char> used(P.size(), 0);
  for (const auto& t : mesh.triangles)
    for (const int v : t) used[static_cast<std::size_t>(v)] = 1;
  const long V = std::count(used.begin(), used.end(), 1);
  d.euler = V - static_cast<long>(counts.size()) + static_cast<long>(mesh.triangles.size());
  d.euler_ok = d.euler == 1 - mesh.holes;
  if (!d.euler_ok) problem("Euler characteristic " + std::to_string(d.euler));

  std::vector<int> parent(P.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  for (const auto& [e, n] : counts) parent[static_cast<std::size_t>(find(e.first))] = find(e.second);
  std::set<int> roots;
  for (std::size_t v = 0; v < P.size(); ++v)
    if (used[v]) roots.insert(find(static_cast<int>(v)));
  d.component_count = static_cast<int>(roots.size());

  // Conformity: interior edges shared by exactly two triangles; every boundary
  // edge either has a coincident slit partner or nothing on its far side.
  d.conforming_ok = true;
  std::map<std::pair<Point, Point>, int> boundary_geom;
  for (const auto& [e, n] : counts) {
    if (n > 2) {
      d.conforming_ok = false;
      problem("edge shared by more than two triangles");
    }
    if (n == 1) {
      auto key = std::minmax(pt(e.first), pt(e.second));
      ++boundary_geom[{key.first, key.second}];
    }
  }
  if (d.conforming_ok && !mesh.triangles.empty()) {
    const PointLocator locator(mesh);
    for (const auto& t : mesh.triangles)
      for (int k = 0; k < 3; ++k) {
        const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
        if (counts.at(make_edge(a, b)) != 1) continue;
        const auto key = std::minmax(pt(a), pt(b));
        if (boundary_geom[{key.first, key.second}] == 2) continue;  // slit pair
        const double len = distance(pt(a), pt(b));
        // Outward normal of a counter-clockwise triangle's edge a->b.
        const double nx = (pt(b).y - pt(a).y) / len, ny = -(pt(b).x - pt(a).x) / len;
        const Point probe{0.5 * (pt(a).x + pt(b).x) + 1e-6 * len * nx,
                          0.5 * (pt(a).y + pt(b).y) + 1e-6 * len * ny};
        if (locator.locate(probe)) {
          d.conforming_ok = false;
          problem("hanging boundary edge inside the mesh");
        }
      }
  }

  // Slit pairing from a raw coordinate scan.
  d.slit_pairing_ok = true;
  std::map<Point, std::vector<int>> at;
  for (std::size_t v = 0; v < P.size(); ++v)
    if (used[v]) at[P[v]].push_back(static_cast<int>(v));
  for (const auto& [p, vs] : at) {
    if (vs.size() < 2) continue;
    d.duplicated_nodes += static_cast<int>(vs.size());
    const int j = dyadic_level(p.y);
    const bool on_two_sided = j >= 0 && p.x > 0.0 && p.x <= 1.0 &&
        std::any_of(mesh.slits.begin(), mesh.slits.end(),
                    [&](const SlitInfo& s) { return s.tooth == j && s.two_sided; });
    std::multiset<Sheet> tags;
    for (const int v : vs) tags.insert(mesh.sheets[static_cast<std::size_t>(v)]);
    if (!on_two_sided || tags != std::multiset<Sheet>{Sheet::upper(j), Sheet::lower(j)}) {
      d.slit_pairing_ok = false;
      std::ostringstream os;
      os << "unexpected coincident vertices at (" << p.x << ", " << p.y << ")";
      problem(os.str());
    }
  }
  for (const auto& s : mesh.slits) {
    const double y = tooth_height(s.tooth);
    int tips = 0;
    for (const auto& [p, vs] : at) {
      if (p.y != y || p.x < 0.0 || p.x > 1.0) continue;
      if (p.x == 0.0) {
        tips += static_cast<int>(vs.size());
        if (vs.size() != 1 || mesh.sheets[static_cast<std::size_t>(vs[0])] != Sheet::tip(s.tooth)) {
          d.slit_pairing_ok = false;
          problem("tip of tooth " + std::to_string(s.tooth) + " is not a single tip vertex");
        }
        continue;
      }
      const std::size_t want = s.two_sided ? 2 : 1;
      if (vs.size() != want) {
        d.slit_pairing_ok = false;
        std::ostringstream os;
        os << "slit point (" << p.x << ", " << p.y << ") has " << vs.size() << " vertices";
        problem(os.str());
      }
    }
    if (tips != 1) {
      d.slit_pairing_ok = false;
      problem("tooth " + std::to_string(s.tooth) + " has " + std::to_string(tips) + " tip vertices");
    }
    d.tip_nodes += tips;
  }
  // Each sheet vertex is used only by triangles on its own side.
  for (const auto& t : mesh.triangles) {
    const double cy = (pt(t[0]).y + pt(t[1]).y + pt(t[2]).y) / 3.0;
    for (const int v : t) {
      const Sheet& s = mesh.sheets[static_cast<std::size_t>(v)];
      if (s.kind != SheetKind::ToothUpper && s.kind != SheetKind::ToothLower) continue;
      const double y = tooth_height(s.tooth);
      const bool above = cy > y;
      if (above != (s.kind == SheetKind::ToothUpper)) {
        d.slit_pairing_ok = false;
        problem("triangle on the wrong side of its sheet vertex");
      }
    }
  }

  // Boundary bookkeeping.
  std::set<int> edge_boundary;
  for (const auto& [e, n] : counts)
    if (n == 1) { edge_boundary.insert(e.first); edge_boundary.insert(e.second); }
  std::map<int, int> listed;
  for (const auto& b : mesh.boundary) {
    ++listed[b.vertex];
    ++d.class_counts[b.cls];
  }
  d.boundary_ok = listed.size() == edge_boundary.size();
  for (const auto& [v, n] : listed)
    if (n != 1 || !edge_boundary.count(v)) d.boundary_ok = false;
  if (!d.boundary_ok) problem("boundary node list does not match boundary edges");

  return d;
}

// ---------------------------------------------------------------------------

namespace {
int sheet_code(const Sheet& s) {
  switch (s.kind) {
    case SheetKind::Free: return 0;
    case SheetKind::ToothUpper: return 1;
    case SheetKind::ToothLower: return -1;
    case SheetKind::Tip: return 2;
    case SheetKind::Cut: return 3;
    case SheetKind::Inaccessible: return 4;
  }
  return 0;
}
}  // namespace

void write_vtk(std::ostream& os, const SlitMesh& mesh, const std::vector<ScalarField>& fields,
               const std::string& title) {
  const auto n = mesh.points.size();
  const auto t = mesh.triangles.size();
  for (const auto& f : fields)
    if (f.values.size() != n) throw MeshError("field '" + f.name + "' has the wrong length");
  const auto old_precision = os.precision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << n << " double\n";
  for (const auto& p : mesh.points) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << t << ' ' << 4 * t << '\n';
  for (const auto& tri : mesh.triangles) os << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  os << "CELL_TYPES " << t << '\n';
  for (std::size_t k = 0; k < t; ++k) os << "5\n";
  os << "POINT_DATA " << n << '\n';
  os << "SCALARS sheet int 1\nLOOKUP_TABLE default\n";
  for (const auto& s : mesh.sheets) os << sheet_code(s) << '\n';
  for (const auto& f : fields) {
    os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (const double v : f.values) os << v << '\n';
  }
  os.precision(old_precision);
}

}  // namespace comblab
