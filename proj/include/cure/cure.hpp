#pragma once

#include "cure/bench/comparison.hpp"
#include "cure/bench/env.hpp"
#include "cure/bench/ridge.hpp"
#include "cure/causal/ci_test.hpp"
#include "cure/causal/entropic.hpp"
#include "cure/causal/graph.hpp"
#include "cure/causal/learn.hpp"
#include "cure/causal/orient.hpp"
#include "cure/causal/skeleton.hpp"
#include "cure/data.hpp"
#include "cure/effects.hpp"
#include "cure/error.hpp"
#include "cure/gp/fit.hpp"
#include "cure/gp/kernel.hpp"
#include "cure/gp/model.hpp"
#include "cure/io/config_spec.hpp"
#include "cure/io/toml.hpp"
#include "cure/mobo/constraint.hpp"
#include "cure/mobo/ehvi.hpp"
#include "cure/mobo/optimizer.hpp"
#include "cure/mobo/pareto.hpp"
#include "cure/pipeline.hpp"
#include "cure/rng.hpp"
#include "cure/space.hpp"
#include "cure/stats.hpp"
