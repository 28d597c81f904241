#pragma once

#include "tcd/error.hpp"
#include "tcd/rng.hpp"
#include "tcd/parallel.hpp"
#include "tcd/model.hpp"
#include "tcd/lattice.hpp"
#include "tcd/walks.hpp"
#include "tcd/single.hpp"
#include "tcd/multi.hpp"
#include "tcd/glr.hpp"
#include "tcd/exactdist.hpp"
#include "tcd/harness.hpp"
#include "tcd/io.hpp"
