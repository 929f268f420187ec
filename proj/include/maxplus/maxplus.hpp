#pragma once

#include "maxplus/estimate.hpp"
#include "maxplus/exponents.hpp"
#include "maxplus/json_io.hpp"
#include "maxplus/law.hpp"
#include "maxplus/structure.hpp"
#include "maxplus/tropical.hpp"
#include "maxplus/verdict.hpp"
