#pragma once

// Everything except the command-line layer (bamani/cli.hpp).

#include "bamani/config.hpp"
#include "bamani/dataset.hpp"
#include "bamani/ensemble.hpp"
#include "bamani/error.hpp"
#include "bamani/graph.hpp"
#include "bamani/learners/learn.hpp"
#include "bamani/network.hpp"
#include "bamani/network_io.hpp"
#include "bamani/pipeline.hpp"
#include "bamani/query.hpp"
#include "bamani/report.hpp"
#include "bamani/rng.hpp"
#include "bamani/stats.hpp"
#include "bamani/synthbench.hpp"
