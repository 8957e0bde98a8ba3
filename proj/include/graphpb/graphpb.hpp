#pragma once

// GraphPB: prosody-boundary graph construction and graph-to-sequence
// encoding for annotated Chinese text. Umbrella header.

#include "graphpb/corpus.hpp"
#include "graphpb/encoders.hpp"
#include "graphpb/errors.hpp"
#include "graphpb/fixtures.hpp"
#include "graphpb/g2s.hpp"
#include "graphpb/gradcheck.hpp"
#include "graphpb/graph.hpp"
#include "graphpb/graph_io.hpp"
#include "graphpb/optim.hpp"
#include "graphpb/prosody.hpp"
#include "graphpb/rng.hpp"
#include "graphpb/tensor.hpp"
#include "graphpb/train.hpp"
#include "graphpb/unicode.hpp"
