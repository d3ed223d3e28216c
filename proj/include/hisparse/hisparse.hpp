#pragma once

#include "block_model.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "measurement_ops.hpp"
#include "operator_io.hpp"
#include "random.hpp"
#include "rip_lab.hpp"
#include "signals.hpp"
#include "solvers.hpp"
