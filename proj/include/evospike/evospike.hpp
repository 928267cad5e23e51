#pragma once

// Umbrella header: evolving recurrent spiking controllers for pole
// balancing and quantifying the information their elements carry about
// the environment.

#include "evospike/cartpole.hpp"
#include "evospike/config.hpp"
#include "evospike/csv.hpp"
#include "evospike/errors.hpp"
#include "evospike/evolution.hpp"
#include "evospike/genotype.hpp"
#include "evospike/infotheory.hpp"
#include "evospike/manifest.hpp"
#include "evospike/network.hpp"
#include "evospike/neuron.hpp"
#include "evospike/parallel.hpp"
#include "evospike/pipeline.hpp"
#include "evospike/rng.hpp"
#include "evospike/sensing.hpp"
#include "evospike/stats.hpp"
#include "evospike/trace_io.hpp"
#include "evospike/trial.hpp"
#include "evospike/version.hpp"
