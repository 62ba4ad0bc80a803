#pragma once

// Convenience include for the whole library.

#include "lgx/bench.hpp"
#include "lgx/corpus.hpp"
#include "lgx/dcg.hpp"
#include "lgx/dcg_train.hpp"
#include "lgx/eif.hpp"
#include "lgx/executive.hpp"
#include "lgx/geometry.hpp"
#include "lgx/grammar.hpp"
#include "lgx/heads.hpp"
#include "lgx/models.hpp"
#include "lgx/parse_tree.hpp"
#include "lgx/particle_filter.hpp"
#include "lgx/perception.hpp"
#include "lgx/planner.hpp"
#include "lgx/registry.hpp"
#include "lgx/repl.hpp"
#include "lgx/rng.hpp"
#include "lgx/semantic_graph.hpp"
#include "lgx/simworld.hpp"
#include "lgx/svg.hpp"
#include "lgx/symbols.hpp"
#include "lgx/vocabulary.hpp"
