#pragma once

#include "shapelab/field.hpp"

#include <vector>

namespace shapelab {

// Signed distance to {phi = 0} by fast sweeping. Nodes next to a sign change keep the first-order
// estimate phi / |grad phi| and the sign of every node is preserved.
ScalarField reinitialize(const ScalarField& phi, int passes = 2);

// Extends seeded values off the interface: `steps` Jacobi sweeps of grad V . grad phi = 0 upwinded
// away from the zero set. Seeds stay fixed; other nodes start at zero.
void extend_speed(const ScalarField& phi, std::vector<double>& V, const std::vector<char>& seed, int steps = 10);

// One explicit Godunov step of phi_t = V |grad phi| (V > 0 grows {phi > 0}).
ScalarField advance(const ScalarField& phi, const std::vector<double>& V, double dt);

// Distance-like level set of the grid box interior (min distance to the faces).
ScalarField box_distance(const Grid& g);

} // namespace shapelab
