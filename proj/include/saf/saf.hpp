#pragma once

#include "saf/experiment.hpp"
#include "saf/fft.hpp"
#include "saf/field.hpp"
#include "saf/init.hpp"
#include "saf/io.hpp"
#include "saf/measurement.hpp"
#include "saf/model_io.hpp"
#include "saf/objective.hpp"
#include "saf/rng.hpp"
#include "saf/solver.hpp"
#include "saf/vec.hpp"
