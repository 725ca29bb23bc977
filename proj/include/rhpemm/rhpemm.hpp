#pragma once

// Primal-dual solver for smooth convex programs with inequality constraints:
// a relaxed hybrid proximal extragradient method of multipliers whose proximal
// subproblems are solved on second-order Taylor models of the data.

#include "rhpemm/certificates.hpp"
#include "rhpemm/error_measure.hpp"
#include "rhpemm/hpe.hpp"
#include "rhpemm/problem.hpp"
#include "rhpemm/quad_model.hpp"
#include "rhpemm/reference.hpp"
#include "rhpemm/registry.hpp"
#include "rhpemm/saddle.hpp"
#include "rhpemm/solver.hpp"
#include "rhpemm/subproblem.hpp"
#include "rhpemm/types.hpp"
