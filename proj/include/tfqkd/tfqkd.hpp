#pragma once

#include "tfqkd/bounds.hpp"
#include "tfqkd/config.hpp"
#include "tfqkd/core.hpp"
#include "tfqkd/curve.hpp"
#include "tfqkd/engine.hpp"
#include "tfqkd/estimation.hpp"
#include "tfqkd/format.hpp"
#include "tfqkd/phase_channel.hpp"
#include "tfqkd/protocol.hpp"
#include "tfqkd/rates.hpp"
#include "tfqkd/report.hpp"
#include "tfqkd/rng.hpp"
#include "tfqkd/statistics.hpp"
#include "tfqkd/table1.hpp"
#include "tfqkd/tally.hpp"
