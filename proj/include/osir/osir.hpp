#pragma once

// Open-set intrusion recognition: KDD-format ingest, RBF-SVM training with
// Platt and Weibull calibration, CAP-gated open-set prediction, and the
// closed/open evaluation pipeline.

#include "osir/cap.hpp"
#include "osir/config.hpp"
#include "osir/dataset_io.hpp"
#include "osir/error.hpp"
#include "osir/eval.hpp"
#include "osir/ingest.hpp"
#include "osir/kernel.hpp"
#include "osir/matrix.hpp"
#include "osir/model_io.hpp"
#include "osir/multiclass.hpp"
#include "osir/openset.hpp"
#include "osir/pipeline.hpp"
#include "osir/platt.hpp"
#include "osir/preprocess.hpp"
#include "osir/random.hpp"
#include "osir/record.hpp"
#include "osir/report_io.hpp"
#include "osir/schema.hpp"
#include "osir/smo.hpp"
#include "osir/weibull.hpp"
