#pragma once

#include "styletopics/activation_stream.hpp"
#include "styletopics/config.hpp"
#include "styletopics/corpus.hpp"
#include "styletopics/documents.hpp"
#include "styletopics/lda.hpp"
#include "styletopics/model_io.hpp"
#include "styletopics/pipeline.hpp"
#include "styletopics/polylda.hpp"
#include "styletopics/rng.hpp"
#include "styletopics/style_eval.hpp"
#include "styletopics/text_vocab.hpp"
#include "styletopics/visual_vocab.hpp"
