#pragma once

#include "modmetric/cli.hpp"
#include "modmetric/extreal.hpp"
#include "modmetric/fixedpoint.hpp"
#include "modmetric/induced.hpp"
#include "modmetric/modular.hpp"
#include "modmetric/properties.hpp"
#include "modmetric/report.hpp"
#include "modmetric/rng.hpp"
#include "modmetric/sampling.hpp"
#include "modmetric/sets.hpp"
#include "modmetric/spaces.hpp"
