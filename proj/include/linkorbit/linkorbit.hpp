#pragma once

// Everything except the CLI layer (include/linkorbit/cli/, which needs yaml-cpp).

#include "linkorbit/errors.hpp"
#include "linkorbit/sampling.hpp"
#include "linkorbit/symplectic.hpp"
#include "linkorbit/loopspace.hpp"
#include "linkorbit/index.hpp"
#include "linkorbit/hamiltonians.hpp"
#include "linkorbit/solver.hpp"
