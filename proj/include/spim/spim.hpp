#pragma once

#include "spim/bench.hpp"
#include "spim/circuit.hpp"
#include "spim/coloring.hpp"
#include "spim/error_model.hpp"
#include "spim/gates.hpp"
#include "spim/model.hpp"
#include "spim/random.hpp"
#include "spim/sampler.hpp"
#include "spim/sparsify.hpp"
