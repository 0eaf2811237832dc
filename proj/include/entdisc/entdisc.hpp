#pragma once

#include "entdisc/baselines.hpp"
#include "entdisc/bipartite.hpp"
#include "entdisc/cluster_agree.hpp"
#include "entdisc/clustering.hpp"
#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"
#include "entdisc/io.hpp"
#include "entdisc/kmeans.hpp"
#include "entdisc/linear.hpp"
#include "entdisc/metrics.hpp"
#include "entdisc/oracles.hpp"
#include "entdisc/pipeline.hpp"
#include "entdisc/proto_refine.hpp"
#include "entdisc/rng.hpp"
#include "entdisc/synth.hpp"
#include "entdisc/vocab.hpp"
#include "entdisc/ward.hpp"
