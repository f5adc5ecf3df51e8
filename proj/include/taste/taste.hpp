#pragma once

#include "taste/config.hpp"
#include "taste/corpus_io.hpp"
#include "taste/dtlstm.hpp"
#include "taste/error.hpp"
#include "taste/eval.hpp"
#include "taste/extraction.hpp"
#include "taste/neural.hpp"
#include "taste/predictions.hpp"
#include "taste/sentiment.hpp"
#include "taste/text.hpp"
