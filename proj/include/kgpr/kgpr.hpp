#pragma once

#include "kgpr/augment.hpp"
#include "kgpr/binary_io.hpp"
#include "kgpr/checkpoint.hpp"
#include "kgpr/config.hpp"
#include "kgpr/encoder.hpp"
#include "kgpr/error.hpp"
#include "kgpr/eval.hpp"
#include "kgpr/graph.hpp"
#include "kgpr/hash.hpp"
#include "kgpr/llm.hpp"
#include "kgpr/objective.hpp"
#include "kgpr/optim.hpp"
#include "kgpr/pipeline.hpp"
#include "kgpr/retrieval.hpp"
#include "kgpr/rng.hpp"
#include "kgpr/text.hpp"
#include "kgpr/train.hpp"
