#pragma once

#include "nldt/baseline.hpp"
#include "nldt/bench.hpp"
#include "nldt/core.hpp"
#include "nldt/datagen.hpp"
#include "nldt/dataset.hpp"
#include "nldt/llga.hpp"
#include "nldt/metrics.hpp"
#include "nldt/rng.hpp"
#include "nldt/serialize.hpp"
#include "nldt/tree.hpp"
#include "nldt/ulga.hpp"
