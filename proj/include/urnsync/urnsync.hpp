#pragma once

#include "urnsync/version.hpp"
#include "urnsync/random.hpp"
#include "urnsync/model.hpp"
#include "urnsync/trajectory.hpp"
#include "urnsync/moments.hpp"
#include "urnsync/enumeration.hpp"
#include "urnsync/stats.hpp"
#include "urnsync/parallel.hpp"
#include "urnsync/montecarlo.hpp"
#include "urnsync/asymptotics.hpp"
#include "urnsync/clt.hpp"
#include "urnsync/io/table.hpp"
#include "urnsync/io/records.hpp"
#include "urnsync/config.hpp"
#include "urnsync/cli.hpp"
