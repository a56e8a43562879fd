#pragma once

#include "mimetic/bv.hpp"
#include "mimetic/checks.hpp"
#include "mimetic/diff_ops.hpp"
#include "mimetic/entropy.hpp"
#include "mimetic/grid.hpp"
#include "mimetic/io.hpp"
#include "mimetic/quadrature.hpp"
#include "mimetic/second_derivative.hpp"
#include "mimetic/types.hpp"
