#pragma once

#include "cogmac/belief.hpp"
#include "cogmac/channel_model.hpp"
#include "cogmac/config.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/gittins.hpp"
#include "cogmac/harness.hpp"
#include "cogmac/multi_user.hpp"
#include "cogmac/planning.hpp"
#include "cogmac/rng.hpp"
#include "cogmac/single_user.hpp"
#include "cogmac/strategy.hpp"
