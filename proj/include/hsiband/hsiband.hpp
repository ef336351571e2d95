#ifndef HSIBAND_HSIBAND_HPP
#define HSIBAND_HSIBAND_HPP

#include "hsiband/classifier.hpp"
#include "hsiband/diagnostics.hpp"
#include "hsiband/errors.hpp"
#include "hsiband/evaluation.hpp"
#include "hsiband/infotheory.hpp"
#include "hsiband/ingest.hpp"
#include "hsiband/pipeline.hpp"
#include "hsiband/random.hpp"
#include "hsiband/selection.hpp"
#include "hsiband/text.hpp"

#endif  // HSIBAND_HSIBAND_HPP
