#pragma once

#include "mecassoc/allocation.hpp"
#include "mecassoc/association.hpp"
#include "mecassoc/common.hpp"
#include "mecassoc/constraints.hpp"
#include "mecassoc/content.hpp"
#include "mecassoc/delaymodel.hpp"
#include "mecassoc/experiment.hpp"
#include "mecassoc/io.hpp"
#include "mecassoc/radio.hpp"
#include "mecassoc/rng.hpp"
#include "mecassoc/scenario.hpp"
