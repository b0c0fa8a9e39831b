#pragma once

#include "aim/config.hpp"
#include "aim/engine.hpp"
#include "aim/harness.hpp"
#include "aim/metrics.hpp"
#include "aim/network.hpp"
#include "aim/random.hpp"
#include "aim/strategy_auction.hpp"
#include "aim/strategy_dauction.hpp"
#include "aim/strategy_eb.hpp"
#include "aim/world.hpp"
