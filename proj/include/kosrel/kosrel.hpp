#pragma once

#include "kosrel/article_nodes.hpp"
#include "kosrel/aspect.hpp"
#include "kosrel/citegraph.hpp"
#include "kosrel/config.hpp"
#include "kosrel/corpus.hpp"
#include "kosrel/evaluate.hpp"
#include "kosrel/fusion.hpp"
#include "kosrel/graphmetrics.hpp"
#include "kosrel/hierarchy.hpp"
#include "kosrel/infometrics.hpp"
#include "kosrel/month.hpp"
#include "kosrel/pipeline.hpp"
#include "kosrel/propagate.hpp"
#include "kosrel/synthgen.hpp"
#include "kosrel/tree_code.hpp"
