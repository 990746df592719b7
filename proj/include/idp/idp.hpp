#pragma once

#include "idp/becker/becker.hpp"
#include "idp/core/boundary.hpp"
#include "idp/core/errors.hpp"
#include "idp/core/gas.hpp"
#include "idp/core/state.hpp"
#include "idp/driver/strang.hpp"
#include "idp/harness/cases.hpp"
#include "idp/harness/config.hpp"
#include "idp/harness/convergence.hpp"
#include "idp/harness/error_norms.hpp"
#include "idp/harness/output.hpp"
#include "idp/hyperbolic/hyperbolic_step.hpp"
#include "idp/hyperbolic/limiter.hpp"
#include "idp/hyperbolic/ssprk.hpp"
#include "idp/mesh/mesh.hpp"
#include "idp/mesh/mesh_io.hpp"
#include "idp/mesh/operators.hpp"
#include "idp/mesh/sparsity.hpp"
#include "idp/parabolic/cg.hpp"
#include "idp/parabolic/parabolic_step.hpp"
#include "idp/riemann/wavespeed.hpp"
