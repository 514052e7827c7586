#pragma once

#include "anchorkit/anchors.hpp"
#include "anchorkit/box.hpp"
#include "anchorkit/config.hpp"
#include "anchorkit/corpus.hpp"
#include "anchorkit/errors.hpp"
#include "anchorkit/eval.hpp"
#include "anchorkit/grid.hpp"
#include "anchorkit/losses.hpp"
#include "anchorkit/parallel.hpp"
#include "anchorkit/pyramid.hpp"
#include "anchorkit/targets.hpp"
#include "anchorkit/viou.hpp"
