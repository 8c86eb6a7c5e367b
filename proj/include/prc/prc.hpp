#pragma once

#include "prc/circuit.hpp"
#include "prc/error.hpp"
#include "prc/experiments.hpp"
#include "prc/io/config.hpp"
#include "prc/io/model_file.hpp"
#include "prc/io/report.hpp"
#include "prc/io/trial_file.hpp"
#include "prc/plant.hpp"
#include "prc/reservoir.hpp"
#include "prc/rng.hpp"
#include "prc/scenario.hpp"
#include "prc/tasks.hpp"
