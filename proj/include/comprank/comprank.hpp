#pragma once

// Pairwise comparative assessment: scoring methods over judged pairs
// (win-ratio, avg-prob, Bradley-Terry, product-of-experts BT and
// Thurstone-Mosteller), soft training-target generation, synthetic judges,
// evaluation metrics, and an LLM judge client.

#include "comprank/calibrate.hpp"
#include "comprank/error.hpp"
#include "comprank/harness.hpp"
#include "comprank/io.hpp"
#include "comprank/judge_client.hpp"
#include "comprank/metrics.hpp"
#include "comprank/model.hpp"
#include "comprank/numeric.hpp"
#include "comprank/rng.hpp"
#include "comprank/scoring.hpp"
#include "comprank/selection.hpp"
#include "comprank/simulate.hpp"
#include "comprank/targets.hpp"
#include "comprank/version.hpp"
