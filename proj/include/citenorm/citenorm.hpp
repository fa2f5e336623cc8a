#pragma once

#include "citenorm/baseline.hpp"
#include "citenorm/clustering.hpp"
#include "citenorm/common.hpp"
#include "citenorm/leiden.hpp"
#include "citenorm/metrics.hpp"
#include "citenorm/network.hpp"
#include "citenorm/normalize.hpp"
#include "citenorm/pipeline.hpp"
#include "citenorm/rng.hpp"
#include "citenorm/synth.hpp"
