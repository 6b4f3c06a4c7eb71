#pragma once

#include "cipshare/algorithms.hpp"
#include "cipshare/bench.hpp"
#include "cipshare/dual.hpp"
#include "cipshare/error.hpp"
#include "cipshare/exact.hpp"
#include "cipshare/facility_set.hpp"
#include "cipshare/instance.hpp"
#include "cipshare/io.hpp"
#include "cipshare/kc_lp.hpp"
#include "cipshare/lorawan.hpp"
#include "cipshare/lp.hpp"
#include "cipshare/residual.hpp"
