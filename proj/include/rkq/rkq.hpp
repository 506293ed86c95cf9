#pragma once

// Randomized kernel quadrature on unbounded domains: closed-form and
// numeric kernel mean embeddings, n-dependent inflated sampling designs,
// Metropolis-within-Gibbs hyperparameter estimation, geometric
// diagnostics and uncertainty aggregation.

#include "rkq/bq.hpp"
#include "rkq/embedding.hpp"
#include "rkq/errors.hpp"
#include "rkq/experiments.hpp"
#include "rkq/geometry.hpp"
#include "rkq/hyper_mcmc.hpp"
#include "rkq/integrands.hpp"
#include "rkq/kernel.hpp"
#include "rkq/measure.hpp"
#include "rkq/quadrature.hpp"
#include "rkq/rng.hpp"
#include "rkq/sampling.hpp"
#include "rkq/special.hpp"
#include "rkq/uq.hpp"
