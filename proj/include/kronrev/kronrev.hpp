#pragma once

#include "kronrev/blockmat.hpp"
#include "kronrev/decomposition.hpp"
#include "kronrev/errors.hpp"
#include "kronrev/estimation.hpp"
#include "kronrev/io.hpp"
#include "kronrev/kron_forward.hpp"
#include "kronrev/kron_reverse.hpp"
#include "kronrev/network.hpp"
#include "kronrev/sibling.hpp"
