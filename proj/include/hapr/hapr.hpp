#pragma once

#include "hapr/assignment.hpp"
#include "hapr/csma.hpp"
#include "hapr/error.hpp"
#include "hapr/grid.hpp"
#include "hapr/mac_sim.hpp"
#include "hapr/model.hpp"
#include "hapr/optimizer.hpp"
#include "hapr/phy.hpp"
#include "hapr/reservation.hpp"
#include "hapr/rng.hpp"
#include "hapr/schedule.hpp"
#include "hapr/throughput.hpp"
