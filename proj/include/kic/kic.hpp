#pragma once

#include "kic/combinatorics.hpp"
#include "kic/diagonalize.hpp"
#include "kic/errors.hpp"
#include "kic/floquet.hpp"
#include "kic/model.hpp"
#include "kic/philox.hpp"
#include "kic/pipeline.hpp"
#include "kic/rmt.hpp"
#include "kic/sector_basis.hpp"
#include "kic/spectrum_io.hpp"
#include "kic/statistics.hpp"
#include "kic/validate.hpp"
