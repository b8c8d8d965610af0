#pragma once

#include "morkit/error.hpp"
#include "morkit/io.hpp"
#include "morkit/keyvalue.hpp"
#include "morkit/metrics.hpp"
#include "morkit/norm.hpp"
#include "morkit/parallel.hpp"
#include "morkit/pipeline.hpp"
#include "morkit/raster.hpp"
#include "morkit/recipe.hpp"
#include "morkit/rng.hpp"
#include "morkit/synthesis.hpp"
#include "morkit/version.hpp"
