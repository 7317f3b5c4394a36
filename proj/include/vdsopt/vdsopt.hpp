#pragma once

#include "common.hpp"
#include "transforms.hpp"
#include "coherence.hpp"
#include "prox.hpp"
#include "profile_opt.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "recovery.hpp"
#include "io.hpp"
#include "datasets.hpp"
#include "experiment.hpp"
#include "outputs.hpp"
