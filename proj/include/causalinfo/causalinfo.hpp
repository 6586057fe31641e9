#pragma once

// Umbrella header: finite-alphabet directed information, the two
// relative-entropy variational objectives with their achievers, and the
// nonanticipative rate-distortion solver with its oracles.

#include "causalinfo/alphabet.hpp"
#include "causalinfo/pmf.hpp"
#include "causalinfo/kernels.hpp"
#include "causalinfo/joint.hpp"
#include "causalinfo/divergence.hpp"
#include "causalinfo/directed_info.hpp"
#include "causalinfo/rate_distortion.hpp"
#include "causalinfo/oracle.hpp"
#include "causalinfo/random.hpp"
#include "causalinfo/problem.hpp"
