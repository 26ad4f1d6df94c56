#pragma once

// Umbrella header.

#include "citecast/error.hpp"
#include "citecast/random.hpp"
#include "citecast/data_model.hpp"
#include "citecast/synthetic.hpp"
#include "citecast/io.hpp"
#include "citecast/features.hpp"
#include "citecast/preprocess.hpp"
#include "citecast/baselines.hpp"
#include "citecast/models/config.hpp"
#include "citecast/models/model.hpp"
#include "citecast/models/serialize.hpp"
#include "citecast/evaluation.hpp"
#include "citecast/fitted.hpp"
#include "citecast/grid_search.hpp"
#include "citecast/citescore_predictor.hpp"
#include "citecast/bundle.hpp"
#include "citecast/experiment.hpp"
