#pragma once

// Convenience umbrella: the whole library in one include.

#include "taukit/bands.hpp"
#include "taukit/csv.hpp"
#include "taukit/error.hpp"
#include "taukit/estimators.hpp"
#include "taukit/geometry.hpp"
#include "taukit/inference.hpp"
#include "taukit/io.hpp"
#include "taukit/model.hpp"
#include "taukit/pairing.hpp"
#include "taukit/parallel.hpp"
#include "taukit/plot.hpp"
#include "taukit/rng.hpp"
#include "taukit/serialize.hpp"
#include "taukit/synth.hpp"
#include "taukit/version.hpp"
