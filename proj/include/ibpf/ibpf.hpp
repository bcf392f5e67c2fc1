#pragma once

#include "ibpf/auglag.hpp"
#include "ibpf/baselines.hpp"
#include "ibpf/diagnostics.hpp"
#include "ibpf/drs.hpp"
#include "ibpf/error.hpp"
#include "ibpf/formulations.hpp"
#include "ibpf/harness.hpp"
#include "ibpf/inner_solver.hpp"
#include "ibpf/operators.hpp"
#include "ibpf/plane.hpp"
#include "ibpf/prob.hpp"
#include "ibpf/rng.hpp"
