#pragma once

#include "bm25.hpp"
#include "chunker.hpp"
#include "corpus.hpp"
#include "embeddings.hpp"
#include "error.hpp"
#include "extract.hpp"
#include "feedback.hpp"
#include "kb.hpp"
#include "normalization.hpp"
#include "parser.hpp"
#include "pls.hpp"
#include "recommender.hpp"
#include "service.hpp"
#include "spec.hpp"
#include "stemmer.hpp"
#include "tagger.hpp"
#include "text.hpp"
