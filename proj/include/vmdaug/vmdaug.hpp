#pragma once

// Umbrella header: VMD-based data augmentation, preprocessing, Prony
// labeling, kernel two-sample testing, the attention classifier, and the
// evaluation harness.

#include "vmdaug/checkpoint.hpp"
#include "vmdaug/config_json.hpp"
#include "vmdaug/dataset_io.hpp"
#include "vmdaug/encoder.hpp"
#include "vmdaug/errors.hpp"
#include "vmdaug/eval.hpp"
#include "vmdaug/mmd.hpp"
#include "vmdaug/preprocess.hpp"
#include "vmdaug/prony.hpp"
#include "vmdaug/rng.hpp"
#include "vmdaug/signal.hpp"
#include "vmdaug/synth.hpp"
#include "vmdaug/vmd.hpp"
