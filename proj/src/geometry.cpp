#include "comblab/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace comblab {

int dyadic_level(double y) {
  if (!(y > 0.0) || y > 1.0) return -1;
  int e = 0;
  const double m = std::frexp(y, &e);  // y = m * 2^e, m in [0.5, 1)
  if (m != 0.5) return -1;
  return 1 - e;
}

std::vector<double> CombSpec::heights() const {
  std::vector<double> h(static_cast<std::size_t>(num_teeth));
  for (int j = 0; j < num_teeth; ++j) h[static_cast<std::size_t>(j)] = tooth_height(j);
  return h;
}

bool TruncatedCombSpec::in_removed_strip(const Point& p) const {
  return p.x >= 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < cut_length();
}

CombSpec build_comb(int num_teeth) {
  if (num_teeth < 1) throw GeometryError("comb needs at least one tooth");
  return CombSpec{num_teeth};
}

TruncatedCombSpec truncate(const CombSpec& spec, int k) {
  if (k < 0) throw GeometryError("truncation index must be >= 0");
  (void)spec;
  return TruncatedCombSpec{CombSpec{k + 1}, k};
}

PartialCombSpec build_partial_comb(int m) {
  if (m < 0) throw GeometryError("partial comb needs m >= 0");
  return PartialCombSpec{m + 1};
}

PartialCombSpec build_rectangle() { return PartialCombSpec{0}; }

std::vector<SlitInfo> slits_of(const DomainSpec& domain) {
  std::vector<SlitInfo> out;
  if (const auto* t = std::get_if<TruncatedCombSpec>(&domain)) {
    for (int j = 0; j <= t->k; ++j) out.push_back({j, j < t->k});
  } else {
    const auto& g = std::get<PartialCombSpec>(domain);
    for (int j = 0; j < g.num_slits; ++j) out.push_back({j, true});
  }
  return out;
}

double smallest_gap(const DomainSpec& domain) {
  if (const auto* t = std::get_if<TruncatedCombSpec>(&domain)) return tooth_height(t->k);
  const auto& g = std::get<PartialCombSpec>(domain);
  return g.num_slits == 0 ? 2.0 : tooth_height(g.num_slits - 1);
}

namespace {

bool in_open_rectangle(const Point& p) {
  return p.x > -1.0 && p.x < 1.0 && p.y > 0.0 && p.y < 2.0;
}

bool on_tooth(const Point& p, int max_tooth) {
  if (p.x < 0.0 || p.x > 1.0) return false;
  const int j = dyadic_level(p.y);
  return j >= 0 && (max_tooth < 0 || j <= max_tooth);
}

}  // namespace

bool contains(const DomainSpec& domain, const Point& p) {
  if (!in_open_rectangle(p)) return false;
  if (const auto* t = std::get_if<TruncatedCombSpec>(&domain)) {
    if (on_tooth(p, t->k)) return false;
    return !(p.x >= 0.0 && p.x < 1.0 && p.y < t->cut_length());
  }
  const auto& g = std::get<PartialCombSpec>(domain);
  return g.num_slits == 0 || !on_tooth(p, g.num_slits - 1);
}

bool comb_contains(const Point& p) { return in_open_rectangle(p) && !on_tooth(p, -1); }

nlohmann::json to_json(const DomainSpec& domain) {
  if (const auto* t = std::get_if<TruncatedCombSpec>(&domain)) {
    return {{"type", "truncated"}, {"teeth", t->k + 1}, {"k", t->k},
            {"cut_length", t->cut_length()}};
  }
  const auto& g = std::get<PartialCombSpec>(domain);
  return {{"type", "partial"}, {"teeth", g.num_slits}, {"m", g.m()}};
}

DomainSpec domain_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "truncated") {
    const int k = j.contains("k") ? j.at("k").get<int>() : j.at("teeth").get<int>() - 1;
    return truncate(build_comb(k + 1), k);
  }
  if (type == "partial") {
    const int m = j.contains("m") ? j.at("m").get<int>() : j.at("teeth").get<int>() - 1;
    if (m < 0) return build_rectangle();
    return build_partial_comb(m);
  }
  if (type == "comb") {
    throw GeometryError("the full comb has infinitely many slits; mesh a truncation instead");
  }
  throw GeometryError("unknown domain type '" + type + "'");
}

std::string describe(const DomainSpec& domain) {
  std::ostringstream os;
  if (const auto* t = std::get_if<TruncatedCombSpec>(&domain)) {
    os << "truncated comb k=" << t->k;
  } else {
    const auto& g = std::get<PartialCombSpec>(domain);
    if (g.num_slits == 0)
      os << "rectangle";
    else
      os << "partial comb m=" << g.m();
  }
  return os.str();
}

// ---------------------------------------------------------------------------

int Sheet::sign() const {
  if (kind == SheetKind::ToothUpper) return 1;
  if (kind == SheetKind::ToothLower) return -1;
  return 0;
}

std::string to_string(const Sheet& s) {
  switch (s.kind) {
    case SheetKind::Free: return "free";
    case SheetKind::ToothUpper: return "upper(" + std::to_string(s.tooth) + ")";
    case SheetKind::ToothLower: return "lower(" + std::to_string(s.tooth) + ")";
    case SheetKind::Tip: return "tip(" + std::to_string(s.tooth) + ")";
    case SheetKind::Cut: return "cut";
    case SheetKind::Inaccessible: return "inaccessible";
  }
  return "?";
}

ExtendedPoint ExtendedPoint::make(Point xy, Sheet sheet) {
  const auto fail = [&](const char* what) {
    std::ostringstream os;
    os << what << " at (" << xy.x << ", " << xy.y << ") sheet " << to_string(sheet);
    throw GeometryError(os.str());
  };
  switch (sheet.kind) {
    case SheetKind::ToothUpper:
    case SheetKind::ToothLower:
      // x = 1 is allowed: the two sides of a tooth stay distinct at the wall.
      if (sheet.tooth < 0 || xy.y != tooth_height(sheet.tooth) || !(xy.x > 0.0) || xy.x > 1.0)
        fail("tooth sheet off its tooth");
      break;
    case SheetKind::Tip:
      if (sheet.tooth < 0 || xy.x != 0.0 || xy.y != tooth_height(sheet.tooth))
        fail("tip sheet off the tip");
      break;
    case SheetKind::Inaccessible:
      if (xy.y != 0.0 || !(xy.x > 0.0) || xy.x > 1.0) fail("inaccessible sheet off I");
      break;
    case SheetKind::Cut:
      if (xy.x != 0.0 || !(xy.y >= 0.0) || xy.y > 1.0) fail("cut sheet off the cut line");
      break;
    case SheetKind::Free:
      break;
  }
  return ExtendedPoint{xy, sheet};
}

int band_of(double y) {
  if (!(y > 0.0)) throw GeometryError("band of non-positive height");
  if (y > 1.0) return 0;
  int e = 0;
  const double m = std::frexp(y, &e);  // y in [2^(e-1), 2^e)
  if (m == 0.5) throw GeometryError("height lies on a tooth; band is sheet dependent");
  // y in (2^(e-1), 2^e) = (2^-j, 2^(1-j)) with j = 1 - e
  return 1 - e;
}

Vec3 embed_F(const ExtendedPoint& p) {
  const auto [x, y] = p.xy;
  if (x < -1.0 || x > 1.0 || y < 0.0 || y > 2.0) {
    std::ostringstream os;
    os << "point (" << x << ", " << y << ") outside the closure of the comb";
    throw GeometryError(os.str());
  }
  if (x <= 0.0) return {x, y, 0.0};
  int band = 0;
  switch (p.sheet.kind) {
    case SheetKind::ToothUpper: band = p.sheet.tooth; break;
    case SheetKind::ToothLower: band = p.sheet.tooth + 1; break;
    case SheetKind::Inaccessible: return {x, 0.0, 0.0};
    default:
      if (y == 0.0) return {x, 0.0, 0.0};  // limit of the bands as j -> infinity
      if (y < 2.0 && dyadic_level(y) >= 0) {
        std::ostringstream os;
        os << "point (" << x << ", " << y << ") lies on a tooth and needs a sheet";
        throw GeometryError(os.str());
      }
      band = band_of(y);
  }
  const double theta = band_angle(band);
  return {x * std::cos(theta), y, x * std::sin(theta)};
}

double dist_ext(const ExtendedPoint& a, const ExtendedPoint& b) {
  const Vec3 fa = embed_F(a);
  const Vec3 fb = embed_F(b);
  return std::hypot(fa[0] - fb[0], fa[1] - fb[1], fa[2] - fb[2]);
}

std::string to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::OuterRegular: return "outer";
    case BoundaryClass::ToothTwoSided: return "tooth";
    case BoundaryClass::ToothTip: return "tip";
    case BoundaryClass::InaccessibleI: return "inaccessible";
    case BoundaryClass::OriginAccessible: return "origin";
    case BoundaryClass::Cut: return "cut";
  }
  return "?";
}

BoundaryClass classify_boundary(const CombSpec& spec, const ExtendedPoint& x) {
  (void)spec;
  const auto [px, py] = x.xy;
  if (x.sheet.kind == SheetKind::Cut) return BoundaryClass::Cut;
  if (px < -1.0 || px > 1.0 || py < 0.0 || py > 2.0) throw GeometryError("point outside the comb");
  if (py == 0.0) {
    if (px == 0.0) return BoundaryClass::OriginAccessible;
    if (px > 0.0) return BoundaryClass::InaccessibleI;
    return BoundaryClass::OuterRegular;
  }
  if (px == 1.0 || px == -1.0 || py == 2.0) return BoundaryClass::OuterRegular;
  const int j = dyadic_level(py);
  if (j >= 0 && px >= 0.0) return px == 0.0 ? BoundaryClass::ToothTip : BoundaryClass::ToothTwoSided;
  std::ostringstream os;
  os << "(" << px << ", " << py << ") is an interior point of the comb";
  throw GeometryError(os.str());
}

// ---------------------------------------------------------------------------
// Inner-diameter distance on a grid graph

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      auto& pa = parent[static_cast<std::size_t>(a)];
      pa = parent[static_cast<std::size_t>(pa)];
      a = pa;
    }
    return a;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

bool segment_crosses_teeth(const Point& a, const Point& b, int num_teeth) {
  const double lo = std::min(a.y, b.y);
  const double hi = std::max(a.y, b.y);
  for (int j = 0; j < num_teeth; ++j) {
    const double h = tooth_height(j);
    if (h < lo || h > hi) continue;
    double x = a.x;
    if (hi > lo) x = a.x + (h - a.y) / (b.y - a.y) * (b.x - a.x);
    else if (std::max(a.x, b.x) < 0.0 || std::min(a.x, b.x) > 1.0) continue;
    else return true;
    if (x >= 0.0 && x <= 1.0) return true;
  }
  return false;
}

}  // namespace

double mazurkiewicz_dist_approx(const CombSpec& spec, const Point& x, const Point& y,
                                double resolution) {
  if (!(resolution > 0.0)) throw GeometryError("resolution must be positive");
  const PartialCombSpec region{spec.num_teeth};
  if (!contains(region, x) || !contains(region, y))
    throw GeometryError("Mazurkiewicz distance needs interior points");
  if (x == y) return 0.0;

  const int n = static_cast<int>(std::ceil(2.0 / resolution));
  const double step = 2.0 / n;
  const auto coord = [&](int i, int r) { return Point{-1.0 + i * step, r * step}; };
  const auto index = [&](int i, int r) { return r * (n + 1) + i; };
  const std::size_t count = static_cast<std::size_t>((n + 1) * (n + 1));

  std::vector<char> valid(count, 0);
  for (int r = 1; r < n; ++r)
    for (int i = 1; i < n; ++i) valid[static_cast<std::size_t>(index(i, r))] = contains(region, coord(i, r));

  const auto snap = [&](const Point& p) {
    const int i0 = static_cast<int>(std::floor((p.x + 1.0) / step));
    const int r0 = static_cast<int>(std::floor(p.y / step));
    int best = -1;
    double best_d = 0.0;
    for (int r = r0 - 1; r <= r0 + 2; ++r)
      for (int i = i0 - 1; i <= i0 + 2; ++i) {
        if (i < 1 || i >= n || r < 1 || r >= n || !valid[static_cast<std::size_t>(index(i, r))]) continue;
        const Point c = coord(i, r);
        if (segment_crosses_teeth(p, c, spec.num_teeth)) continue;
        const double d = distance(p, c);
        if (best < 0 || d < best_d) { best = index(i, r); best_d = d; }
      }
    if (best < 0) throw GeometryError("point not resolved by the grid; refine the resolution");
    return best;
  };
  const int sx = snap(x);
  const int sy = snap(y);

  std::vector<double> key(count, 0.0);
  std::vector<int> order;
  order.reserve(count);
  for (int r = 1; r < n; ++r)
    for (int i = 1; i < n; ++i) {
      const int id = index(i, r);
      if (!valid[static_cast<std::size_t>(id)]) continue;
      const Point c = coord(i, r);
      key[static_cast<std::size_t>(id)] = std::max(distance(c, x), distance(c, y));
      order.push_back(id);
    }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
  });

  UnionFind uf(count);
  std::vector<char> added(count, 0);
  for (const int id : order) {
    added[static_cast<std::size_t>(id)] = 1;
    const int i = id % (n + 1);
    const int r = id / (n + 1);
    const Point c = coord(i, r);
    for (int dr = -1; dr <= 1; ++dr)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dr == 0) continue;
        const int ni = i + di;
        const int nr = r + dr;
        if (ni < 1 || ni >= n || nr < 1 || nr >= n) continue;
        const int nid = index(ni, nr);
        if (!added[static_cast<std::size_t>(nid)]) continue;
        if (segment_crosses_teeth(c, coord(ni, nr), spec.num_teeth)) continue;
        uf.unite(id, nid);
      }
    if (added[static_cast<std::size_t>(sx)] && added[static_cast<std::size_t>(sy)] &&
        uf.find(sx) == uf.find(sy))
      return std::max(key[static_cast<std::size_t>(id)], distance(x, y));
  }
  throw GeometryError("points lie in different grid components at this resolution");
}

}  // namespace comblab
