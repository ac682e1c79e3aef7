#pragma once

// Quantum reference frame degradation toolkit: spin-j directional frames,
// bounded-energy phase references, their measurement-induced decay, and
// longevity scaling experiments.

#include "qrf/directional.hpp"
#include "qrf/io.hpp"
#include "qrf/longevity.hpp"
#include "qrf/matrix.hpp"
#include "qrf/numerics.hpp"
#include "qrf/phase.hpp"
