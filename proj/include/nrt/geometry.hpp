#ifndef NRT_GEOMETRY_HPP
#define NRT_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

// Star-shaped planar domains parametrized by a truncated Fourier radial
// function r(theta) = radius0 * (1 + sum_k a_k cos(k theta) + b_k sin(k theta)),
// their boundary discretizations, and pixel-mask utilities for
// reconstruction-by-intersection.

namespace nrt {

using Vec2 = Eigen::Vector2d;

struct FourierTerm {
    int k = 0;
    double a = 0.0;  // cos(k theta) amplitude (relative to radius0)
    double b = 0.0;  // sin(k theta) amplitude
};

class RadialShape {
public:
    // Throws std::invalid_argument if radius0 <= 0 or r(theta) <= 0 anywhere
    // on a 1024-point theta grid.
    RadialShape(const Vec2& center, double radius0,
                std::vector<FourierTerm> terms = {});

    const Vec2& center() const { return center_; }
    double radius0() const { return radius0_; }
    const std::vector<FourierTerm>& terms() const { return terms_; }

    double radius(double theta) const;
    double radius_deriv(double theta) const;
    double radius_deriv2(double theta) const;

    // Boundary point at parameter theta.
    Vec2 point(double theta) const;

    // Strict interior test: points on the boundary count as outside.
    bool contains(const Vec2& p) const;

    // Dilation/shrink about the center by a positive factor.
    RadialShape scaled(double factor) const;
    // Same radial function about a new star center (rigid translation).
    RadialShape recentered(const Vec2& new_center) const;

    double min_radius() const;
    double max_radius() const;

private:
    Vec2 center_;
    double radius0_;
    std::vector<FourierTerm> terms_;
};

RadialShape make_shape(const Vec2& center, double radius0,
                       std::vector<FourierTerm> terms = {});

// Discretized closed curve: nodes at theta_j = 2 pi j / n, analytic outward
// normals, arc-length quadrature weights |p'(theta_j)| * 2 pi / n, and the
// signed curvature at each node.
struct ParamBoundary {
    std::vector<Vec2> nodes;
    std::vector<Vec2> normals;
    std::vector<double> weights;
    std::vector<double> curvatures;
    std::vector<double> thetas;
    RadialShape shape;

    int size() const { return static_cast<int>(nodes.size()); }
    double length() const;
};

// Requires n >= 4.
ParamBoundary discretize(const RadialShape& shape, int n);

// True iff all nprobe boundary samples of `inner` lie strictly inside
// `outer` (clearance > 0). Requires nprobe >= 64.
bool shape_inclusion(const RadialShape& inner, const RadialShape& outer,
                     int nprobe = 256);

// Signed clearance: min over boundary samples of inner of
// (r_outer - |p - c_outer|) along the ray from outer's center.
double inclusion_clearance(const RadialShape& inner, const RadialShape& outer,
                           int nprobe = 256);

// Linear radial interpolation from outer (element 0) to inner (element
// steps-1). The inner shape is first moved to outer's star center. Throws if
// the nesting r_inner < r_outer fails at any theta.
std::vector<RadialShape> homotopy_family(const RadialShape& outer,
                                         const RadialShape& inner, int steps);

// ---------------------------------------------------------------------------
// pixel masks

struct GridSpec {
    double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;
    int nx = 128, ny = 128;
    bool operator==(const GridSpec&) const = default;
};

struct PixelGrid {
    GridSpec spec;
    std::vector<std::uint8_t> inside;  // row-major, ny rows of nx

    int count() const;
    double pixel_area() const;
    Vec2 pixel_center(int ix, int iy) const;
};

enum class MaskMode { intersect, unite };

PixelGrid mask_from_shapes(const std::vector<RadialShape>& shapes,
                           const GridSpec& spec, MaskMode mode);

// |a n b| / |a u b|; 1 when both masks are empty. Throws on grid mismatch.
double jaccard(const PixelGrid& a, const PixelGrid& b);

}  // namespace nrt

#endif
