#pragma once

#include "gms/analysis.hpp"
#include "gms/distributions.hpp"
#include "gms/error.hpp"
#include "gms/io.hpp"
#include "gms/ladder.hpp"
#include "gms/oracle.hpp"
#include "gms/population.hpp"
#include "gms/process.hpp"
#include "gms/rng.hpp"
#include "gms/theory.hpp"
