// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "physarum/augment.hpp"
#include "physarum/conductance.hpp"
#include "physarum/dynamics.hpp"
#include "physarum/io.hpp"
#include "physarum/matrix.hpp"
#include "physarum/model.hpp"
#include "physarum/probgen.hpp"
#include "physarum/solvers.hpp"
