#pragma once

#include "symtensor/bcss.hpp"
#include "symtensor/checked.hpp"
#include "symtensor/cost_model.hpp"
#include "symtensor/dense.hpp"
#include "symtensor/errors.hpp"
#include "symtensor/io.hpp"
#include "symtensor/random.hpp"
#include "symtensor/sttsm.hpp"
#include "symtensor/sym_index.hpp"
