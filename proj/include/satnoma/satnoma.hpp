#pragma once

// Umbrella header: the whole library in dependency order.

#include "satnoma/rng.hpp"
#include "satnoma/config.hpp"
#include "satnoma/topology.hpp"
#include "satnoma/bessel.hpp"
#include "satnoma/channel.hpp"
#include "satnoma/caching.hpp"
#include "satnoma/state.hpp"
#include "satnoma/link_metrics.hpp"
#include "satnoma/environment.hpp"
#include "satnoma/neural.hpp"
#include "satnoma/gradcheck.hpp"
#include "satnoma/replay_buffer.hpp"
#include "satnoma/maddpg.hpp"
#include "satnoma/baselines.hpp"
#include "satnoma/metrics_io.hpp"
