#pragma once

// Binned occupation measures over (fundamental-domain box x direction angle),
// the Liouville reference, and distances between histograms.

#include <cstdint>
#include <vector>

#include "leafdiff/metric.hpp"

namespace leafdiff {

struct Grid3D {
    int nx = 16, ny = 16, nv = 8;
    double box = 0.85; // euclidean half-width covering the octagon

    int cells() const { return nx * ny * nv; }
    int xy_cells() const { return nx * ny; }

    // -1 when outside the box
    int xy_index(double x, double y) const {
        int i = static_cast<int>((x + box) / (2 * box) * nx);
        int j = static_cast<int>((y + box) / (2 * box) * ny);
        if (i < 0 || i >= nx || j < 0 || j >= ny) return -1;
        return j * nx + i;
    }

    int v_index(double v) const {
        int k = static_cast<int>(wrap_angle(v) / two_pi * nv);
        return k >= nv ? nv - 1 : k;
    }

    int index(double x, double y, double v) const {
        int xy = xy_index(x, y);
        return xy < 0 ? -1 : xy * nv + v_index(v);
    }

    bool operator==(const Grid3D& o) const {
        return nx == o.nx && ny == o.ny && nv == o.nv && box == o.box;
    }
};

struct Histogram3D {
    Grid3D grid;
    std::vector<double> mass;     // integer-valued for empirical counts
    std::vector<uint8_t> xy_mask; // per xy-cell: intersects the domain
    double total = 0;

    explicit Histogram3D(const Grid3D& g = Grid3D{})
        : grid(g), mass(g.cells(), 0.0), xy_mask(g.xy_cells(), 0) {}

    void add(double x, double y, double v, double w = 1.0) {
        int idx = grid.index(x, y, v);
        if (idx < 0 || !xy_mask[static_cast<size_t>(idx) / grid.nv]) return;
        mass[idx] += w;
        total += w;
    }

    void merge(const Histogram3D& o);
    std::vector<double> normalized() const;
};

// mask + reference Liouville masses: cell mass ∝ ∫ lambda^2 e^{2phi} dxdy,
// uniform in v; midpoint quadrature, adaptively refined on boundary cells
Histogram3D liouville_reference(const MetricModel& M, const Grid3D& grid);

// mask for empirical accumulation (same rule as the reference)
void apply_mask_from(Histogram3D& h, const Histogram3D& ref);

double tv_distance(const Histogram3D& a, const Histogram3D& b);

struct ChiSquare {
    double statistic = 0;
    int dof = 0;
    double z_std = 0; // std of per-cell z-scores (calibration)
};

// effective-count chi-square of emp against ref
ChiSquare chi_square(const Histogram3D& emp, const Histogram3D& ref, double n_eff);

// chi-square of the direction marginal against uniform
ChiSquare chi_square_direction(const Histogram3D& emp, double n_eff);

} // namespace leafdiff
