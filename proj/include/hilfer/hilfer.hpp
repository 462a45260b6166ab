#pragma once

// Umbrella header for the Hilfer fractional integro-differential toolkit.

#include "hilfer/certificates.hpp"
#include "hilfer/cli.hpp"
#include "hilfer/errors.hpp"
#include "hilfer/expression.hpp"
#include "hilfer/frac_ops.hpp"
#include "hilfer/linalg.hpp"
#include "hilfer/operators.hpp"
#include "hilfer/problem_io.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/special_functions.hpp"
