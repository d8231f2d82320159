#pragma once

#include "feedback_lab/agents.hpp"
#include "feedback_lab/classifier.hpp"
#include "feedback_lab/corpus.hpp"
#include "feedback_lab/error.hpp"
#include "feedback_lab/plot.hpp"
#include "feedback_lab/rng.hpp"
#include "feedback_lab/scheme.hpp"
#include "feedback_lab/trials.hpp"
#include "feedback_lab/trust.hpp"
