#pragma once

#include "uslice/barycenter.hpp"
#include "uslice/divergences.hpp"
#include "uslice/fw_core.hpp"
#include "uslice/io.hpp"
#include "uslice/measures.hpp"
#include "uslice/numerics.hpp"
#include "uslice/oracle.hpp"
#include "uslice/ot1d.hpp"
#include "uslice/parallel.hpp"
#include "uslice/slicing.hpp"
#include "uslice/suot.hpp"
#include "uslice/types.hpp"
#include "uslice/usot.hpp"
