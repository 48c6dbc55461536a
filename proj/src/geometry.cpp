#include "nrt/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nrt {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

RadialShape::RadialShape(const Vec2& center, double radius0,
                         std::vector<FourierTerm> terms)
    : center_(center), radius0_(radius0), terms_(std::move(terms)) {
    if (!(radius0_ > 0.0))
        throw std::invalid_argument("RadialShape: radius0 must be positive");
    for (const auto& t : terms_)
        if (t.k < 0) throw std::invalid_argument("RadialShape: negative frequency");
    // positivity of r(theta) on a fine grid
    const int ngrid = 1024;
    for (int j = 0; j < ngrid; ++j) {
        if (!(radius(kTwoPi * j / ngrid) > 0.0))
            throw std::invalid_argument("RadialShape: r(theta) <= 0 (degenerate curve)");
    }
}

double RadialShape::radius(double theta) const {
    double s = 1.0;
    for (const auto& t : terms_)
        s += t.a * std::cos(t.k * theta) + t.b * std::sin(t.k * theta);
    return radius0_ * s;
}

double RadialShape::radius_deriv(double theta) const {
    double s = 0.0;
    for (const auto& t : terms_)
        s += t.k * (-t.a * std::sin(t.k * theta) + t.b * std::cos(t.k * theta));
    return radius0_ * s;
}

double RadialShape::radius_deriv2(double theta) const {
    double s = 0.0;
    for (const auto& t : terms_)
        s += -t.k * t.k * (t.a * std::cos(t.k * theta) + t.b * std::sin(t.k * theta));
    return radius0_ * s;
}

Vec2 RadialShape::point(double theta) const {
    const double r = radius(theta);
    return center_ + r * Vec2(std::cos(theta), std::sin(theta));
}

bool RadialShape::contains(const Vec2& p) const {
    const Vec2 d = p - center_;
    const double rho = d.norm();
    if (rho == 0.0) return true;
    return rho < radius(std::atan2(d.y(), d.x()));
}

RadialShape RadialShape::scaled(double factor) const {
    if (!(factor > 0.0))
        throw std::invalid_argument("RadialShape::scaled: factor must be positive");
    return RadialShape(center_, radius0_ * factor, terms_);
}

RadialShape RadialShape::recentered(const Vec2& new_center) const {
    return RadialShape(new_center, radius0_, terms_);
}

double RadialShape::min_radius() const {
    const int n = 1024;
    double m = radius(0.0);
    for (int j = 1; j < n; ++j) m = std::min(m, radius(kTwoPi * j / n));
    return m;
}

double RadialShape::max_radius() const {
    const int n = 1024;
    double m = radius(0.0);
    for (int j = 1; j < n; ++j) m = std::max(m, radius(kTwoPi * j / n));
    return m;
}

RadialShape make_shape(const Vec2& center, double radius0,
                       std::vector<FourierTerm> terms) {
    return RadialShape(center, radius0, std::move(terms));
}

double ParamBoundary::length() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

ParamBoundary discretize(const RadialShape& shape, int n) {
    if (n < 4) throw std::invalid_argument("discretize: need n >= 4");
    ParamBoundary b{{}, {}, {}, {}, {}, shape};
    b.nodes.reserve(n);
    b.normals.reserve(n);
    b.weights.reserve(n);
    b.curvatures.reserve(n);
    b.thetas.reserve(n);
    const double dtheta = kTwoPi / n;
    for (int j = 0; j < n; ++j) {
        const double th = dtheta * j;
        const double r = shape.radius(th);
        const double rp = shape.radius_deriv(th);
        const double rpp = shape.radius_deriv2(th);
        const Vec2 er(std::cos(th), std::sin(th));
        const Vec2 et(-std::sin(th), std::cos(th));
        const double speed = std::sqrt(r * r + rp * rp);
        b.nodes.push_back(shape.center() + r * er);
        b.normals.push_back((r * er - rp * et) / speed);
        b.weights.push_back(speed * dtheta);
        // polar curvature (positive for convex counterclockwise curves)
        b.curvatures.push_back((r * r + 2.0 * rp * rp - r * rpp) /
                               (speed * speed * speed));
        b.thetas.push_back(th);
    }
    return b;
}

double inclusion_clearance(const RadialShape& inner, const RadialShape& outer,
                           int nprobe) {
    if (nprobe < 64) throw std::invalid_argument("inclusion_clearance: nprobe >= 64");
    double clearance = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nprobe; ++j) {
        const Vec2 p = inner.point(kTwoPi * j / nprobe);
        const Vec2 d = p - outer.center();
        const double rho = d.norm();
        const double r = rho == 0.0 ? outer.radius(0.0)
                                    : outer.radius(std::atan2(d.y(), d.x()));
        clearance = std::min(clearance, r - rho);
    }
    return clearance;
}

bool shape_inclusion(const RadialShape& inner, const RadialShape& outer,
                     int nprobe) {
    return inclusion_clearance(inner, outer, nprobe) > 0.0;
}

std::vector<RadialShape> homotopy_family(const RadialShape& outer,
                                         const RadialShape& inner, int steps) {
    if (steps < 2) throw std::invalid_argument("homotopy_family: steps >= 2");
    const RadialShape in = inner.recentered(outer.center());
    // nesting must hold pointwise in theta about the common center
    const int ngrid = 1024;
    for (int j = 0; j < ngrid; ++j) {
        const double th = kTwoPi * j / ngrid;
        if (in.radius(th) >= outer.radius(th))
            throw std::invalid_argument(
                "homotopy_family: inner radial function must stay below outer");
    }
    // r_l(theta) = (1-l) r_out + l r_in is again a truncated Fourier series;
    // merge term lists with absolute amplitudes, then renormalize.
    std::vector<RadialShape> fam;
    fam.reserve(steps);
    for (int i = 0; i < steps; ++i) {
        const double l = static_cast<double>(i) / (steps - 1);
        const double r0 =
            (1.0 - l) * outer.radius0() + l * in.radius0();
        std::vector<FourierTerm> terms;
        auto add = [&terms](int k, double a, double b) {
            for (auto& t : terms)
                if (t.k == k) { t.a += a; t.b += b; return; }
            terms.push_back({k, a, b});
        };
        for (const auto& t : outer.terms())
            add(t.k, (1.0 - l) * outer.radius0() * t.a / r0,
                (1.0 - l) * outer.radius0() * t.b / r0);
        for (const auto& t : in.terms())
            add(t.k, l * in.radius0() * t.a / r0, l * in.radius0() * t.b / r0);
        fam.emplace_back(outer.center(), r0, std::move(terms));
    }
    return fam;
}

int PixelGrid::count() const {
    int c = 0;
    for (auto v : inside) c += v ? 1 : 0;
    return c;
}

double PixelGrid::pixel_area() const {
    return (spec.x1 - spec.x0) / spec.nx * (spec.y1 - spec.y0) / spec.ny;
}

Vec2 PixelGrid::pixel_center(int ix, int iy) const {
    return Vec2(spec.x0 + (ix + 0.5) * (spec.x1 - spec.x0) / spec.nx,
                spec.y0 + (iy + 0.5) * (spec.y1 - spec.y0) / spec.ny);
}

PixelGrid mask_from_shapes(const std::vector<RadialShape>& shapes,
                           const GridSpec& spec, MaskMode mode) {
    if (shapes.empty())
        throw std::invalid_argument("mask_from_shapes: empty shape list");
    if (spec.nx < 1 || spec.ny < 1)
        throw std::invalid_argument("mask_from_shapes: resolution >= 1");
    PixelGrid g{spec, std::vector<std::uint8_t>(
                          static_cast<size_t>(spec.nx) * spec.ny, 0)};
    for (int iy = 0; iy < spec.ny; ++iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            const Vec2 p = g.pixel_center(ix, iy);
            bool in = (mode == MaskMode::intersect);
            for (const auto& s : shapes) {
                const bool c = s.contains(p);
                if (mode == MaskMode::intersect) in = in && c;
                else in = in || c;
                if (mode == MaskMode::intersect && !in) break;
                if (mode == MaskMode::unite && in) break;
            }
            g.inside[static_cast<size_t>(iy) * spec.nx + ix] = in ? 1 : 0;
        }
    }
    return g;
}

double jaccard(const PixelGrid& a, const PixelGrid& b) {
    if (!(a.spec == b.spec)) throw std::invalid_argument("jaccard: grid mismatch");
    long long inter = 0, uni = 0;
    for (size_t i = 0; i < a.inside.size(); ++i) {
        const bool ia = a.inside[i], ib = b.inside[i];
        inter += (ia && ib) ? 1 : 0;
        uni += (ia || ib) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace nrt
