#pragma once

#include "flowae/artifact.hpp"
#include "flowae/autoencoder.hpp"
#include "flowae/detector.hpp"
#include "flowae/evaluator.hpp"
#include "flowae/flow_ingest.hpp"
#include "flowae/oversampler.hpp"
#include "flowae/pipeline.hpp"
#include "flowae/sequencer.hpp"
#include "flowae/synthetic.hpp"
#include "flowae/threat_models.hpp"
#include "flowae/trainer.hpp"
