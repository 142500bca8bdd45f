#pragma once

// The cocompact Fuchsian group of the genus-2 regular octagon (all interior
// angles pi/4), Dirichlet fundamental domain membership, and reduction of
// line elements modulo the group.

#include <array>
#include <vector>

#include "leafdiff/disk.hpp"

namespace leafdiff {

struct FuchsianGroup {
    // g1..g4 followed by their inverses; the eight orbit points
    // gens[i](0) are the mirror points of the eight octagon sides
    std::array<MobiusMap, 8> gens;
    std::array<cplx, 8> mirror;   // gens[i](0), cached
    double octagon_vertex_radius = 0; // hyperbolic
    double side_distance = 0;         // hyperbolic distance 0 -> side midpoint
    int max_word_budget = 64;

    // product g1 g2 g1^-1 g2^-1 g3 g4 g3^-1 g4^-1 (should be +-identity)
    MobiusMap relation_product() const;

    std::array<cplx, 8> vertices() const; // euclidean positions, ccw
};

FuchsianGroup build_octagon_group();

bool in_fundamental_domain(const FuchsianGroup& G, DiskPoint z, double tol = 1e-12);

struct ReducedState {
    LineElement element;
    MobiusMap applied;
    int word_length = 0;
};

ReducedState reduce(const FuchsianGroup& G, const LineElement& v);

// interior angle of the octagon at a vertex, measured from the side geodesics
double octagon_interior_angle(const FuchsianGroup& G);

// all distinct group elements of word length <= L (includes identity)
std::vector<MobiusMap> enumerate_words(const FuchsianGroup& G, int L);

} // namespace leafdiff
