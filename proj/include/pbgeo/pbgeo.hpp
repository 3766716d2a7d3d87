#pragma once

// Convenience header pulling in the whole library.

#include "pbgeo/error.hpp"
#include "pbgeo/geometry.hpp"
#include "pbgeo/euclidean_map.hpp"
#include "pbgeo/diffeo.hpp"
#include "pbgeo/pullback.hpp"
#include "pbgeo/barycentre.hpp"
#include "pbgeo/rae.hpp"
#include "pbgeo/learn/resnet.hpp"
#include "pbgeo/learn/isomap.hpp"
#include "pbgeo/learn/objective.hpp"
#include "pbgeo/learn/train.hpp"
#include "pbgeo/serialize.hpp"
#include "pbgeo/harness/datasets.hpp"
#include "pbgeo/harness/metrics.hpp"
#include "pbgeo/harness/output.hpp"
#include "pbgeo/harness/experiment.hpp"
