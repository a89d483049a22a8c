#pragma once

#include "fraccomp/analysis.hpp"
#include "fraccomp/error.hpp"
#include "fraccomp/fitting.hpp"
#include "fraccomp/foc.hpp"
#include "fraccomp/io.hpp"
#include "fraccomp/metrics.hpp"
#include "fraccomp/models.hpp"
#include "fraccomp/population.hpp"
#include "fraccomp/spectral.hpp"
#include "fraccomp/version.hpp"
