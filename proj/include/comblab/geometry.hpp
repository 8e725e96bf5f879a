#pragma once

// Comb family (full comb, truncations, partial combs), the extended metric
// induced by the fan embedding, boundary classification and an
// inner-diameter (Mazurkiewicz) distance approximation.

#include <array>
#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace comblab {

class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Height of tooth j, i.e. 2^-j. Exact in binary floating point.
inline double tooth_height(int j) { return std::ldexp(1.0, -j); }

/// Returns j if y == 2^-j exactly for some j >= 0, otherwise -1.
int dyadic_level(double y);

struct CombSpec {
  int num_teeth = 1;

  std::vector<double> heights() const;
};

struct TruncatedCombSpec {
  CombSpec base;  // teeth 0..k
  int k = 0;

  double cut_length() const { return tooth_height(k); }
  /// Strip [0,1) x (0, 2^-k) removed from the comb.
  bool in_removed_strip(const Point& p) const;
};

struct PartialCombSpec {
  /// Number of slits; teeth 0..num_slits-1. Zero gives the plain rectangle.
  int num_slits = 1;

  int m() const { return num_slits - 1; }
};

using DomainSpec = std::variant<TruncatedCombSpec, PartialCombSpec>;

CombSpec build_comb(int num_teeth);
TruncatedCombSpec truncate(const CombSpec& spec, int k);
PartialCombSpec build_partial_comb(int m);
PartialCombSpec build_rectangle();

/// Teeth present as slits in the domain, and whether each is two-sided.
struct SlitInfo {
  int tooth = 0;
  bool two_sided = true;
};
std::vector<SlitInfo> slits_of(const DomainSpec& domain);

/// Smallest vertical gap a mesh of the domain must resolve.
double smallest_gap(const DomainSpec& domain);

/// True if p lies in the open domain (no boundary points, no slit points).
bool contains(const DomainSpec& domain, const Point& p);
/// Same for the (infinite-tooth) comb itself.
bool comb_contains(const Point& p);

nlohmann::json to_json(const DomainSpec& domain);
DomainSpec domain_from_json(const nlohmann::json& j);
std::string describe(const DomainSpec& domain);

// ---------------------------------------------------------------------------
// Extended points

enum class SheetKind { Free, ToothUpper, ToothLower, Tip, Cut, Inaccessible };

struct Sheet {
  SheetKind kind = SheetKind::Free;
  int tooth = -1;

  static Sheet free() { return {}; }
  static Sheet upper(int j) { return {SheetKind::ToothUpper, j}; }
  static Sheet lower(int j) { return {SheetKind::ToothLower, j}; }
  static Sheet tip(int j) { return {SheetKind::Tip, j}; }
  static Sheet cut() { return {SheetKind::Cut, -1}; }
  static Sheet inaccessible() { return {SheetKind::Inaccessible, -1}; }

  /// +1 on upper sheets, -1 on lower sheets, 0 otherwise.
  int sign() const;

  friend auto operator<=>(const Sheet&, const Sheet&) = default;
};

std::string to_string(const Sheet& s);

struct ExtendedPoint {
  Point xy;
  Sheet sheet;

  /// Checks the sheet/coordinate invariants; throws GeometryError.
  static ExtendedPoint make(Point xy, Sheet sheet = {});

  friend auto operator<=>(const ExtendedPoint&, const ExtendedPoint&) = default;
};

/// The natural projection to the plane.
inline Point phi(const ExtendedPoint& p) { return p.xy; }

/// Fan angle of band j, 2^-j for all j >= 0.
inline double band_angle(int j) { return std::ldexp(1.0, -j); }

/// Band index j with y in (2^-j, 2^(1-j)); y in (1, 2] maps to 0.
int band_of(double y);

using Vec3 = std::array<double, 3>;

/// Fan embedding into R^3, extended continuously to the completion.
Vec3 embed_F(const ExtendedPoint& p);
inline Vec3 embed_F(const Point& p) { return embed_F(ExtendedPoint{p, {}}); }

double dist_ext(const ExtendedPoint& a, const ExtendedPoint& b);

enum class BoundaryClass {
  OuterRegular,
  ToothTwoSided,
  ToothTip,
  InaccessibleI,
  OriginAccessible,
  Cut  // new boundary of a truncation; not part of the comb's boundary
};

std::string to_string(BoundaryClass c);

/// Partition class of a boundary point of the comb. Interior points throw.
BoundaryClass classify_boundary(const CombSpec& spec, const ExtendedPoint& x);

/// Prime-end boundary membership: everything except I.
inline bool on_prime_end_boundary(BoundaryClass c) {
  return c != BoundaryClass::InaccessibleI && c != BoundaryClass::Cut;
}

/// Approximates the inner-diameter distance inf diam E over connected E
/// containing x and y, on a grid graph over the comb with spec.num_teeth teeth.
/// Returns the smallest D such that x and y are joined by a grid path inside
/// B(x,D) and B(y,D); the true distance lies in [D, 2D] up to grid error.
double mazurkiewicz_dist_approx(const CombSpec& spec, const Point& x,
                                const Point& y, double resolution);

}  // namespace comblab
