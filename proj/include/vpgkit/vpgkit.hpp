#pragma once

#include "vpgkit/error.hpp"
#include "vpgkit/alphabet.hpp"
#include "vpgkit/bits.hpp"
#include "vpgkit/vpa.hpp"
#include "vpgkit/vpa_ops.hpp"
#include "vpgkit/builders.hpp"
#include "vpgkit/dfa.hpp"
#include "vpgkit/congruence.hpp"
#include "vpgkit/stallings.hpp"
#include "vpgkit/recognisable.hpp"
#include "vpgkit/equations.hpp"
#include "vpgkit/io.hpp"
#include "vpgkit/pipeline.hpp"
