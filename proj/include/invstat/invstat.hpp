#pragma once

#include "invstat/core.hpp"
#include "invstat/elastic.hpp"
#include "invstat/equilibrium.hpp"
#include "invstat/models.hpp"
#include "invstat/oracle.hpp"
#include "invstat/poses.hpp"
#include "invstat/qp.hpp"
#include "invstat/statics.hpp"
#include "invstat/topology.hpp"
