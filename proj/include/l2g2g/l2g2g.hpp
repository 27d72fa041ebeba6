#pragma once

#include "l2g2g/bench.hpp"
#include "l2g2g/errors.hpp"
#include "l2g2g/gcn.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/metrics.hpp"
#include "l2g2g/partition.hpp"
#include "l2g2g/rng.hpp"
#include "l2g2g/sbm.hpp"
#include "l2g2g/sync.hpp"
#include "l2g2g/train.hpp"
#include "l2g2g/transform.hpp"
