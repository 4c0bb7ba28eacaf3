#pragma once

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"
#include "emomine/features.hpp"
#include "emomine/harness.hpp"
#include "emomine/labelsets.hpp"
#include "emomine/lstm.hpp"
#include "emomine/metrics.hpp"
#include "emomine/nb.hpp"
#include "emomine/ranksvm.hpp"
#include "emomine/report.hpp"
#include "emomine/rng.hpp"
#include "emomine/stopwords.hpp"
