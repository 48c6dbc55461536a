#ifndef NRT_TIME_GRID_HPP
#define NRT_TIME_GRID_HPP

#include <stdexcept>
#include <vector>

namespace nrt {

// Uniform midpoint rule on (0, T]: nodes t_k = (k + 1/2) T / nt (0-based),
// all strictly inside (0, T), weights T / nt summing to T. Space-time fields
// are node-major: sample index = node * nt + time.
struct TimeGrid {
    double T = 1.0;
    int nt = 32;

    TimeGrid() = default;
    TimeGrid(double T_, int nt_) : T(T_), nt(nt_) {
        if (!(T > 0.0) || nt < 1)
            throw std::invalid_argument("TimeGrid: need T > 0, nt >= 1");
    }

    double node(int k) const { return (k + 0.5) * T / nt; }
    double weight() const { return T / nt; }
    std::vector<double> nodes() const {
        std::vector<double> v(nt);
        for (int k = 0; k < nt; ++k) v[k] = node(k);
        return v;
    }
    bool operator==(const TimeGrid&) const = default;
};

}  // namespace nrt

#endif
