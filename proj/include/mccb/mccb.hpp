#pragma once

#include "mccb/balance.hpp"
#include "mccb/banded.hpp"
#include "mccb/diffops.hpp"
#include "mccb/dtw.hpp"
#include "mccb/error.hpp"
#include "mccb/gmm.hpp"
#include "mccb/io.hpp"
#include "mccb/metrics.hpp"
#include "mccb/multicoord.hpp"
#include "mccb/reproduce.hpp"
#include "mccb/serialize.hpp"
#include "mccb/trajectory.hpp"
#include "mccb/pipeline.hpp"
#include "mccb/synthetic.hpp"
