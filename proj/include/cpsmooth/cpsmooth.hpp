#pragma once

#include "approximants.hpp"
#include "blocks.hpp"
#include "bounds.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "measure.hpp"
#include "quadrature.hpp"
