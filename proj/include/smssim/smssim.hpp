// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

// Umbrella header: the whole SMS-similarity pipeline.

#include "smssim/common.hpp"
#include "smssim/corpus.hpp"
#include "smssim/csm.hpp"
#include "smssim/embeddings.hpp"
#include "smssim/eval.hpp"
#include "smssim/pipeline.hpp"
#include "smssim/tagger.hpp"
#include "smssim/wboc.hpp"
